use std::io::Write;

use rayon::prelude::*;

use super::{build_q0, ApproxSolution, Geometry};
use crate::error::{Error, Result};
use crate::field::{elastic_apply, PeriodicGrid, Spectral};
use crate::spectral::fit_slope;
use crate::tensor::{basis_from_frame, bulk_force, Frame, Mat3, SymTraceless3, Vec3};

/// Where the residual is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum Sampling {
    /// Every node of a periodic grid, spectral derivatives.
    Grid(PeriodicGrid),
    /// Polar samples of the tube `|d| <= delta` around a radial interface,
    /// finite-difference derivatives of the analytic field.
    Tube { nodes_per_eps: f64, angles: usize },
}

/// Minimum samples per `eps` across the layer.
pub const MIN_NODES_PER_EPS: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ResidualReport {
    pub epsilon: f64,
    pub sup_norm: f64,
    pub l2_norm: f64,
    pub samples: usize,
    /// Largest `|R : E^i|` with the basis of the local director frame.
    pub channel_sup: [f64; 5],
}

/// `Q ↦ ΔQ + (L/2)(∂_ik Q_kj + ∂_jk Q_ki - (2/3) δ_ij ∂_kl Q_kl)` applied to a
/// point function by fourth-order differences with step `tau`.
pub fn operator_fd(
    f: &dyn Fn(&Vec3) -> Result<SymTraceless3>,
    x: &Vec3,
    tau: f64,
    dim: usize,
    l: f64,
) -> Result<SymTraceless3> {
    const W: [(f64, f64); 4] = [
        (-2.0, 1.0 / 12.0),
        (-1.0, -8.0 / 12.0),
        (1.0, 8.0 / 12.0),
        (2.0, -1.0 / 12.0),
    ];
    let at = |da: usize, sa: f64, db: usize, sb: f64| {
        let mut y = *x;
        y[da] += sa * tau;
        y[db] += sb * tau;
        f(&y)
    };
    let mut hess = [[SymTraceless3::ZERO; 3]; 3];
    let centre = f(x)?;
    for a in 0..dim {
        let mut s = centre * -30.0;
        for (k, w) in [(-2.0, -1.0), (-1.0, 16.0), (1.0, 16.0), (2.0, -1.0)] {
            s += at(a, k, a, 0.0)? * w;
        }
        hess[a][a] = s * (1.0 / (12.0 * tau * tau));
        for b in 0..a {
            let mut s = SymTraceless3::ZERO;
            for (i, wi) in W {
                for (j, wj) in W {
                    s += at(a, i, b, j)? * (wi * wj);
                }
            }
            hess[a][b] = s * (1.0 / (tau * tau));
            hess[b][a] = hess[a][b];
        }
    }
    let h: [[Mat3; 3]; 3] = std::array::from_fn(|a| std::array::from_fn(|b| hess[a][b].matrix()));
    let mut out = [[0.0; 3]; 3];
    let mut div2 = 0.0;
    for k in 0..3 {
        for m in 0..3 {
            div2 += h[k][m][k][m];
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            let lap: f64 = (0..3).map(|a| h[a][a][i][j]).sum();
            let mixed: f64 = (0..3).map(|k| h[i][k][k][j] + h[j][k][k][i]).sum();
            let id = if i == j { 1.0 } else { 0.0 };
            out[i][j] = lap + 0.5 * l * (mixed - 2.0 / 3.0 * id * div2);
        }
    }
    Ok(SymTraceless3::from_matrix(&out))
}

fn channels(r: &SymTraceless3, n: &Vec3) -> Result<[f64; 5]> {
    let e = basis_from_frame(&Frame::from_director(*n)?);
    Ok(std::array::from_fn(|i| r.dot(&e[i]).abs()))
}

/// Pointwise residual with difference step `tau`.
pub fn residual_at(sol: &ApproxSolution, x: &Vec3, t: f64, tau: f64) -> Result<SymTraceless3> {
    let p = &sol.params;
    let dim = match sol.geometry {
        Geometry::Radial { dim, .. } => dim,
        _ => 3,
    };
    let q = sol.q_at(x, t)?;
    Ok(sol.dqdt_at(x, t)?
        - operator_fd(&|y| sol.q_at(y, t), x, tau, dim, p.l)?
        - bulk_force(&q, p) * (1.0 / (p.epsilon * p.epsilon)))
}

/// `R = ∂_t Q - 𝓛Q - eps^-2 f(Q)` of the approximate solution at time `t`.
pub fn residual(sol: &ApproxSolution, sampling: &Sampling, t: f64) -> Result<ResidualReport> {
    let p = sol.params;
    let eps = p.epsilon;
    let eps2 = eps * eps;
    match sampling {
        Sampling::Grid(grid) => {
            let h = grid.min_h();
            if eps / h < MIN_NODES_PER_EPS {
                return Err(Error::Resolution(format!(
                    "eps/h = {:.2} below {MIN_NODES_PER_EPS}",
                    eps / h
                )));
            }
            let field = build_q0(sol, *grid, t)?;
            let sp = Spectral::new(grid);
            let lq = elastic_apply(&field, &sp);
            let rows = (0..grid.len())
                .into_par_iter()
                .map(|i| {
                    let x = grid.position(i);
                    let q = &field.data[i];
                    let r = sol.dqdt_at(&x, t)? - lq.data[i] - bulk_force(q, &p) * (1.0 / eps2);
                    let ch = if *q == SymTraceless3::ZERO {
                        [0.0; 5]
                    } else {
                        channels(&r, &sol.director.eval(&sol.geometry, &x, t)?.0)?
                    };
                    Ok((r.norm(), ch))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut channel_sup = [0.0f64; 5];
            for (_, ch) in &rows {
                for c in 0..5 {
                    channel_sup[c] = channel_sup[c].max(ch[c]);
                }
            }
            Ok(ResidualReport {
                epsilon: eps,
                sup_norm: rows.iter().map(|r| r.0).fold(0.0, f64::max),
                l2_norm: (rows.iter().map(|r| r.0 * r.0).sum::<f64>() * grid.cell_volume()).sqrt(),
                samples: rows.len(),
                channel_sup,
            })
        }
        Sampling::Tube {
            nodes_per_eps,
            angles,
        } => {
            let Geometry::Radial { center, dim, .. } = sol.geometry else {
                return Err(Error::Config(
                    "tube sampling needs a radial geometry".into(),
                ));
            };
            if *nodes_per_eps < MIN_NODES_PER_EPS || *angles == 0 {
                return Err(Error::Resolution(format!(
                    "{nodes_per_eps} nodes per eps (need {MIN_NODES_PER_EPS}), {angles} angles"
                )));
            }
            let delta = sol.glue.delta;
            let radius = sol.geometry.radius(t)?;
            if !(delta < radius) {
                return Err(Error::Domain(format!(
                    "tube of half-width {delta} reaches the center of a sphere of radius {radius}"
                )));
            }
            let hr = eps / nodes_per_eps;
            let nr = (2.0 * delta / hr).ceil() as usize + 1;
            let hr = 2.0 * delta / (nr - 1) as f64;
            let tau = eps / 32.0;
            let rows = (0..nr * angles)
                .into_par_iter()
                .map(|k| {
                    let (i, j) = (k / angles, k % angles);
                    let r = radius - delta + i as f64 * hr;
                    let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.1) / *angles as f64;
                    let x = [
                        center[0] + r * th.cos(),
                        center[1] + r * th.sin(),
                        center[2],
                    ];
                    let res = residual_at(sol, &x, t, tau)?;
                    let ch = channels(&res, &sol.director.eval(&sol.geometry, &x, t)?.0)?;
                    Ok((i, r, res.norm(), ch))
                })
                .collect::<Result<Vec<_>>>()?;
            let shell = if dim == 2 { 2.0 } else { 4.0 } * std::f64::consts::PI;
            let mut l2 = 0.0;
            let mut channel_sup = [0.0f64; 5];
            for (i, r, v, ch) in &rows {
                let w = if *i == 0 || *i == nr - 1 { 0.5 } else { 1.0 };
                l2 += w * hr * shell * r.powi(dim as i32 - 1) * v * v / *angles as f64;
                for c in 0..5 {
                    channel_sup[c] = channel_sup[c].max(ch[c]);
                }
            }
            Ok(ResidualReport {
                epsilon: eps,
                sup_norm: rows.iter().map(|r| r.2).fold(0.0, f64::max),
                l2_norm: l2.sqrt(),
                samples: rows.len(),
                channel_sup,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ResidualSweep {
    pub rows: Vec<ResidualReport>,
    /// Fitted exponents of `sup_norm` and `l2_norm` against `eps`.
    pub sup_exponent: f64,
    pub l2_exponent: f64,
}

impl ResidualSweep {
    pub fn from_reports(rows: Vec<ResidualReport>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Config(
                "a residual sweep needs at least two eps values".into(),
            ));
        }
        let le: Vec<f64> = rows.iter().map(|r| r.epsilon.ln()).collect();
        let ls: Vec<f64> = rows.iter().map(|r| r.sup_norm.ln()).collect();
        let l2: Vec<f64> = rows.iter().map(|r| r.l2_norm.ln()).collect();
        Ok(ResidualSweep {
            sup_exponent: fit_slope(&le, &ls),
            l2_exponent: fit_slope(&le, &l2),
            rows,
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "epsilon,sup_norm,l2_norm")?;
        for r in &self.rows {
            writeln!(
                w,
                "{:.12e},{:.12e},{:.12e}",
                r.epsilon, r.sup_norm, r.l2_norm
            )?;
        }
        Ok(())
    }
}
