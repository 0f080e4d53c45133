//! Linearized quadratic forms across a flat transition layer on `I = [-1, 1]`.
//!
//! The scalar forms are
//!
//! ```text
//! G_j(p) = (1 + 2L/3) ∫ |p'|^2 + eps^-2 ∫ V_j(s(r/eps)) p^2,  V ∈ {theta, kappa, iota}
//! ```
//!
//! discretized by linear elements (second-order centered differences with
//! natural boundary rows) and a lumped trapezoidal mass, giving a symmetric
//! tridiagonal pencil `K p = lambda M p`.

mod pencil;
mod theorem;

use std::io::Write;

pub use pencil::{smallest_eigenpairs, Eigenpairs, Pencil};
pub use theorem::{theorem_max_eigenvalue, theorem_report, TheoremForm, TheoremReport};

use crate::error::{Error, Result};
use crate::layer::{potential, s_profile, LayerContext, Potential};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum FormKind {
    /// Potential `theta`.
    G0,
    /// Potential `kappa`.
    G1,
    /// Potential `iota`.
    G2,
}

impl FormKind {
    pub fn from_index(k: usize) -> Result<Self> {
        match k {
            0 => Ok(FormKind::G0),
            1 => Ok(FormKind::G1),
            2 => Ok(FormKind::G2),
            _ => Err(Error::Config(format!("form kind {k} is not 0, 1 or 2"))),
        }
    }

    pub fn index(&self) -> usize {
        match self {
            FormKind::G0 => 0,
            FormKind::G1 => 1,
            FormKind::G2 => 2,
        }
    }

    pub fn potential(&self) -> Potential {
        match self {
            FormKind::G0 => Potential::Theta,
            FormKind::G1 => Potential::Kappa,
            FormKind::G2 => Potential::Iota,
        }
    }
}

/// Weight of the `L^2` mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum MassWeight {
    Unit,
    /// `omega(r) = 1 - s(r/eps)`, decaying exponentially into the nematic side.
    Isotropic,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FormSpec {
    pub kind: FormKind,
    pub epsilon: f64,
    pub l: f64,
    pub n: usize,
    pub weight: MassWeight,
    /// Multiplies the potential term; `0` leaves the Neumann Laplacian.
    pub potential_scale: f64,
}

impl FormSpec {
    /// Resolution `h = min(eps/16, 4 eps^3)`; kind 1 uses the isotropic weight.
    pub fn new(kind: FormKind, epsilon: f64, l: f64) -> Result<Self> {
        let n = default_nodes(epsilon)?;
        let weight = match kind {
            FormKind::G1 => MassWeight::Isotropic,
            _ => MassWeight::Unit,
        };
        let spec = FormSpec {
            kind,
            epsilon,
            l,
            n,
            weight,
            potential_scale: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_nodes(mut self, n: usize) -> Result<Self> {
        self.n = n;
        self.validate()?;
        Ok(self)
    }

    pub fn with_weight(mut self, weight: MassWeight) -> Self {
        self.weight = weight;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 64 {
            return Err(Error::Config(format!("N = {} must be at least 64", self.n)));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 0.5) {
            return Err(Error::Config(format!(
                "epsilon = {} must lie in (0, 0.5]",
                self.epsilon
            )));
        }
        LayerContext::new(self.l)?;
        Ok(())
    }

    pub fn h(&self) -> f64 {
        2.0 / (self.n - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.h();
        (0..self.n).map(|i| -1.0 + i as f64 * h).collect()
    }

    fn check_resolution(&self) -> Result<()> {
        let ratio = self.epsilon / self.h();
        if ratio < 16.0 * (1.0 - 1e-12) {
            return Err(Error::Resolution(format!(
                "eps/h = {ratio:.2} < 16 (eps = {}, N = {})",
                self.epsilon, self.n
            )));
        }
        Ok(())
    }
}

/// Largest grid a form may use.
pub const MAX_NODES: usize = 1 << 24;

/// Node count on `[-1, 1]` for `h = min(eps/16, 4 eps^3)`.
pub fn default_nodes(eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "eps = {eps} must be positive"
        )));
    }
    let h = (eps / 16.0).min(4.0 * eps * eps * eps);
    let n = (2.0 / h).ceil() + 1.0;
    if n > MAX_NODES as f64 {
        return Err(Error::Resolution(format!(
            "eps = {eps:e} needs {n:.3e} nodes, more than {MAX_NODES}"
        )));
    }
    Ok((n as usize).max(64))
}

/// Lumped trapezoidal weights on a uniform grid.
pub(crate) fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}

/// Stiffness `c ∫ p'^2 + ∫ v p^2` as a tridiagonal pair (diag, off).
pub(crate) fn stiffness(c: f64, v: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = v.len();
    let w = trapezoid_weights(n, h);
    let mut diag: Vec<f64> = (0..n).map(|i| w[i] * v[i]).collect();
    for i in 0..n - 1 {
        diag[i] += c / h;
        diag[i + 1] += c / h;
    }
    (diag, vec![-c / h; n - 1])
}

/// Assembles the pencil of `G_kind` and its mass.
pub fn assemble_form(spec: &FormSpec) -> Result<Pencil> {
    spec.validate()?;
    let ctx = LayerContext::new(spec.l)?;
    let h = spec.h();
    let r = spec.nodes();
    let eps2 = spec.epsilon * spec.epsilon;
    let pot = spec.kind.potential();
    let v: Vec<f64> = r
        .iter()
        .map(|&x| {
            let s = s_profile(x / spec.epsilon, &ctx, 0).unwrap();
            spec.potential_scale * potential(pot, s) / eps2
        })
        .collect();
    let (diag, off) = stiffness(ctx.stiffness(), &v, h);
    let mut mass = trapezoid_weights(spec.n, h);
    if spec.weight == MassWeight::Isotropic {
        for (m, &x) in mass.iter_mut().zip(&r) {
            *m *= s_profile(-x / spec.epsilon, &ctx, 0).unwrap();
        }
    }
    Pencil::new(diag, off, mass)
}

/// Lowest eigenpairs of an assembled form.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EigenReport {
    pub kind: Option<FormKind>,
    pub epsilon: Option<f64>,
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

/// The `k` smallest eigenpairs of a pencil.
pub fn eigen_smallest(pencil: &Pencil, k: usize) -> Result<EigenReport> {
    let e = smallest_eigenpairs(pencil, k)?;
    Ok(EigenReport {
        kind: None,
        epsilon: None,
        eigenvalues: e.values,
        eigenvectors: e.vectors,
        residuals: e.residuals,
    })
}

/// `k` smallest eigenpairs of `G_kind` at the given spec.
pub fn form_spectrum(spec: &FormSpec, k: usize) -> Result<EigenReport> {
    let mut r = eigen_smallest(&assemble_form(spec)?, k)?;
    r.kind = Some(spec.kind);
    r.epsilon = Some(spec.epsilon);
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GapRow {
    pub kind: usize,
    pub epsilon: f64,
    pub n: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda2_eps2: f64,
    /// Same quantities with the unit mass (differs only for kind 1).
    pub lambda1_unweighted: f64,
    pub lambda2_unweighted: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GapSweep {
    pub rows: Vec<GapRow>,
    /// `min lambda2 eps^2` over the sweep.
    pub c0: f64,
    /// `max / min` of `lambda2 eps^2`.
    pub gap_spread: f64,
    /// `|lambda1|` strictly decreasing as eps decreases.
    pub ground_decreasing: bool,
    /// Slope of `log |lambda1|` against `1/eps`.
    pub ground_decay_rate: f64,
}

impl GapSweep {
    pub fn gap_positive(&self) -> bool {
        self.c0 > 0.0
    }

    pub fn gap_stable(&self) -> bool {
        self.gap_spread < 3.0
    }

    /// CSV with columns `kind,epsilon,N,lambda1,lambda2,lambda2_eps2`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "kind,epsilon,N,lambda1,lambda2,lambda2_eps2")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{:.12e},{:.12e},{:.12e}",
                r.kind, r.epsilon, r.n, r.lambda1, r.lambda2, r.lambda2_eps2
            )?;
        }
        Ok(())
    }
}

/// `(lambda1, lambda2)` over an eps sweep, with the scaling diagnostics.
///
/// `nodes` overrides the default resolution per eps; each grid must keep
/// `eps/h >= 16`.
pub fn spectral_gap_sweep(
    kind: FormKind,
    l: f64,
    epsilons: &[f64],
    nodes: Option<&[usize]>,
) -> Result<GapSweep> {
    if epsilons.len() < 3 {
        return Err(Error::Config(format!(
            "a sweep needs at least 3 eps values, got {}",
            epsilons.len()
        )));
    }
    let mut rows = Vec::with_capacity(epsilons.len());
    for (i, &eps) in epsilons.iter().enumerate() {
        let mut spec = FormSpec::new(kind, eps, l)?;
        if let Some(ns) = nodes {
            spec = spec.with_nodes(ns[i])?;
        }
        spec.check_resolution()?;
        let w = form_spectrum(&spec, 2)?;
        let u = if spec.weight == MassWeight::Unit {
            w.clone()
        } else {
            form_spectrum(&spec.with_weight(MassWeight::Unit), 2)?
        };
        let (l1, l2) = (w.eigenvalues[0], w.eigenvalues[1]);
        log::debug!(
            "kind {} eps {eps}: lambda1 {l1:e}, lambda2 {l2:e}",
            kind.index()
        );
        rows.push(GapRow {
            kind: kind.index(),
            epsilon: eps,
            n: spec.n,
            lambda1: l1,
            lambda2: l2,
            lambda2_eps2: l2 * eps * eps,
            lambda1_unweighted: u.eigenvalues[0],
            lambda2_unweighted: u.eigenvalues[1],
        });
    }
    let c0 = rows
        .iter()
        .map(|r| r.lambda2_eps2)
        .fold(f64::INFINITY, f64::min);
    let cmax = rows
        .iter()
        .map(|r| r.lambda2_eps2)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut order: Vec<&GapRow> = rows.iter().collect();
    order.sort_by(|a, b| b.epsilon.partial_cmp(&a.epsilon).unwrap());
    let ground_decreasing = order
        .windows(2)
        .all(|w| w[1].lambda1.abs() < w[0].lambda1.abs());
    let xs: Vec<f64> = order.iter().map(|r| 1.0 / r.epsilon).collect();
    let ys: Vec<f64> = order
        .iter()
        .map(|r| r.lambda1.abs().max(f64::MIN_POSITIVE).ln())
        .collect();
    Ok(GapSweep {
        rows,
        c0,
        gap_spread: if c0 > 0.0 { cmax / c0 } else { f64::INFINITY },
        ground_decreasing,
        ground_decay_rate: -fit_slope(&xs, &ys),
    })
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// `max(p(-1)^2, p(1)^2) / (eps (G0(p) + ∫p^2))` for a nodal vector `p`.
pub fn endpoint_ratio(p: &[f64], spec: &FormSpec) -> Result<f64> {
    if spec.kind != FormKind::G0 {
        return Err(Error::Config("endpoint ratio is defined for kind 0".into()));
    }
    let unit = FormSpec {
        weight: MassWeight::Unit,
        ..*spec
    };
    let pencil = assemble_form(&unit)?;
    if p.len() != pencil.len() {
        return Err(Error::GridMismatch(format!(
            "{} values for {} nodes",
            p.len(),
            pencil.len()
        )));
    }
    let ends = p[0].powi(2).max(p[p.len() - 1].powi(2));
    let denom = spec.epsilon * (pencil.energy(p) + pencil.mass_norm_sq(p));
    Ok(if ends == 0.0 { 0.0 } else { ends / denom })
}
