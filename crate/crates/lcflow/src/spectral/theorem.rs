use super::{smallest_eigenpairs, stiffness, trapezoid_weights, FormKind, FormSpec, Pencil};
use crate::approx::{glued_order, GlueConfig};
use crate::error::{Error, Result};
use crate::layer::LayerContext;
use crate::tensor::{basis_from_frame, hessian_apply, Frame, ModelParams, SymTraceless3};

/// The vector-valued form
/// `Q ↦ -∫|∇Q|^2 - L∫|∇·Q|^2 + eps^-2 ∫ H_{Q0} Q : Q`
/// on fields `Q(r) = Σ q_i(r) E^i` with `n = e1` and `r = x1 ∈ [-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TheoremForm {
    pub epsilon: f64,
    pub l: f64,
    pub n: usize,
    pub elastic: bool,
    pub bulk: bool,
    pub glue: GlueConfig,
}

impl TheoremForm {
    /// Default resolution and a gluing band of half-width 4, so the interval
    /// lies inside the plateau of the cut-off.
    pub fn new(epsilon: f64, l: f64) -> Result<Self> {
        let spec = FormSpec::new(FormKind::G0, epsilon, l)?;
        Ok(TheoremForm {
            epsilon,
            l,
            n: spec.n,
            elastic: true,
            bulk: true,
            glue: GlueConfig::new(4.0)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TheoremReport {
    pub epsilon: f64,
    pub n: usize,
    /// Largest Rayleigh quotient per channel `E^0..E^4`.
    pub channel_max: [f64; 5],
    pub max_eigenvalue: f64,
    /// Largest off-diagonal channel coupling relative to the diagonal.
    pub block_defect: f64,
}

type Mat5 = [[f64; 5]; 5];

/// Pointwise 5x5 coefficient matrices of the form in the `E^i` basis:
/// gradient `A`, bulk `B(r)` and mass `N`.
fn coefficients(q0: &SymTraceless3, l: f64, params: &ModelParams) -> (Mat5, Mat5, Mat5) {
    let frame = Frame::standard();
    let e = basis_from_frame(&frame);
    let axis = frame.n();
    let mut a = [[0.0; 5]; 5];
    let mut b = [[0.0; 5]; 5];
    let mut m = [[0.0; 5]; 5];
    for i in 0..5 {
        let di = e[i].apply(&axis);
        for j in 0..5 {
            let dj = e[j].apply(&axis);
            let div: f64 = (0..3).map(|k| di[k] * dj[k]).sum();
            m[i][j] = e[i].dot(&e[j]);
            a[i][j] = m[i][j] + l * div;
            b[i][j] = e[i].dot(&hessian_apply(q0, &e[j], params));
        }
    }
    (a, b, m)
}

/// Assembles and diagonalizes the form channel by channel.
pub fn theorem_report(form: &TheoremForm) -> Result<TheoremReport> {
    let spec = FormSpec::new(FormKind::G0, form.epsilon, form.l)?.with_nodes(form.n)?;
    spec.check_resolution()?;
    let ctx = LayerContext::new(form.l)?;
    let params = ModelParams::new(form.l, form.epsilon)?;
    let h = spec.h();
    let r = spec.nodes();
    let eps2 = form.epsilon * form.epsilon;
    let e0 = basis_from_frame(&Frame::standard())[0];

    let mut grad = [0.0; 5];
    let mut mass = [0.0; 5];
    let mut pot: Vec<[f64; 5]> = Vec::with_capacity(r.len());
    let mut defect: f64 = 0.0;
    for &x in &r {
        let q0 = e0 * glued_order(x, form.epsilon, &form.glue, &ctx)[0];
        let (a, b, m) = coefficients(&q0, form.l, &params);
        let mut row = [0.0; 5];
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    let scale = a[i][i].abs().max(b[i][i].abs()).max(m[i][i].abs()).max(1.0);
                    let off = a[i][j].abs().max(b[i][j].abs()).max(m[i][j].abs());
                    defect = defect.max(off / scale);
                }
            }
            grad[i] = a[i][i];
            mass[i] = m[i][i];
            // the form carries +H, the pencil the opposite sign
            row[i] = -b[i][i];
        }
        pot.push(row);
    }
    if defect > 1e-12 {
        return Err(Error::Domain(format!(
            "channels couple at a constant frame (defect {defect:e})"
        )));
    }

    let w = trapezoid_weights(r.len(), h);
    let mut channel_max = [0.0; 5];
    for c in 0..5 {
        let v: Vec<f64> = pot
            .iter()
            .map(|p| if form.bulk { p[c] / eps2 } else { 0.0 })
            .collect();
        let g = if form.elastic { grad[c] } else { 0.0 };
        let (diag, off) = stiffness(g, &v, h);
        let m: Vec<f64> = w.iter().map(|x| x * mass[c]).collect();
        let e = smallest_eigenpairs(&Pencil::new(diag, off, m)?, 1)?;
        channel_max[c] = -e.values[0];
    }
    let max_eigenvalue = channel_max
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(TheoremReport {
        epsilon: form.epsilon,
        n: form.n,
        channel_max,
        max_eigenvalue,
        block_defect: defect,
    })
}

/// Largest eigenvalue of the form relative to `∫|Q|^2`.
pub fn theorem_max_eigenvalue(epsilon: f64, l: f64, n: usize) -> Result<f64> {
    let mut form = TheoremForm::new(epsilon, l)?;
    form.n = n;
    Ok(theorem_report(&form)?.max_eigenvalue)
}
