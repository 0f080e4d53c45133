//! Fundamental solutions of `u'' = q(z) u` fixed by their behaviour at one
//! end of the line.
//!
//! Every solution is written as a Volterra equation anchored at the end
//! where its asymptotics are prescribed,
//!
//! ```text
//! u(z) = g(z) + ∫_{z0}^{z} K(z, y) dq(y) u(y) dy,
//! ```
//!
//! with `K(z,y) = sinh(r(z-y))/r` when `q → r^2` and `K = z - y` when
//! `q → 0`. After factoring out `exp(σz)` the kernel is a sum of
//! exponentials in `z - y`, so the integral operator is evaluated by
//! running sums. Picard sweeps are performed window by window: the
//! operator is causal, so the fixed point on `[z0, z_k]` does not depend on
//! anything to the right of `z_k`.

use super::{logistic, potential, s_profile, GridFn, LayerContext, Potential, Tail, UniformGrid};
use crate::error::{Error, Result};

const WINDOW: usize = 16;
const PICARD_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 4 * WINDOW;
const END_MASS_TOL: f64 = 1e-10;

/// Profile of the model equation, `(1 + tanh(y/2))/2`.
pub fn model_profile(y: f64) -> f64 {
    logistic(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum FundamentalKind {
    /// `~ exp(y/√(1+A))` as `y → -∞`.
    U1,
    /// `~ exp(-y/√(1+A))` as `y → -∞`.
    U2,
    /// `→ 1` as `y → +∞`.
    U3,
    /// `~ y` as `y → +∞`.
    U4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum PairKind {
    Kappa,
    Iota,
}

/// Convergence record of the windowed Picard iteration.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PicardStats {
    pub windows: usize,
    pub max_sweeps: usize,
    /// Largest final sup-change over all windows (relative).
    pub final_change: f64,
    /// Median ratio of successive sup-changes.
    pub contraction_rate: f64,
    /// `∫ sup_z |K(z,y) dq(y)| dy` over the whole grid.
    pub kernel_mass: f64,
    /// Estimated kernel mass beyond the anchoring end.
    pub end_mass: f64,
}

#[derive(Debug, Clone)]
pub struct VolterraSolution {
    pub u: GridFn,
    pub du: Vec<f64>,
    pub stats: PicardStats,
    /// Relative sup residual of the ODE away from the grid ends.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
enum Base {
    /// `g = exp(σz)` with `σ = ±r`.
    Exp { sigma: f64 },
    /// `g = 1`.
    Const,
    /// `g = z`.
    Linear,
}

struct March {
    u: Vec<f64>,
    du: Vec<f64>,
    stats: PicardStats,
}

/// Adams-Moulton weights, oldest sample first, by number of points.
fn am_weights(points: usize) -> &'static [f64] {
    const W2: [f64; 2] = [0.5, 0.5];
    const W3: [f64; 3] = [-1.0 / 12.0, 8.0 / 12.0, 5.0 / 12.0];
    const W4: [f64; 4] = [1.0 / 24.0, -5.0 / 24.0, 19.0 / 24.0, 9.0 / 24.0];
    const W5: [f64; 5] = [
        -19.0 / 720.0,
        106.0 / 720.0,
        -264.0 / 720.0,
        646.0 / 720.0,
        251.0 / 720.0,
    ];
    const W6: [f64; 6] = [
        27.0 / 1440.0,
        -173.0 / 1440.0,
        482.0 / 1440.0,
        -798.0 / 1440.0,
        1427.0 / 1440.0,
        475.0 / 1440.0,
    ];
    match points {
        2 => &W2,
        3 => &W3,
        4 => &W4,
        5 => &W5,
        _ => &W6,
    }
}

/// Solves the anchored Volterra equation marching left to right.
fn march(z: &UniformGrid, dq: &[f64], r: f64, base: Base) -> Result<March> {
    let n = z.n;
    let h = z.h();
    let nodes: Vec<f64> = z.nodes().collect();

    // kernel K~(z,y) = Σ c_j exp(β_j (z-y)) or the linear kernel z - y
    let (terms, linear): (Vec<(f64, f64)>, bool) = match base {
        Base::Exp { sigma } if sigma > 0.0 => (vec![(0.5 / r, 0.0), (-0.5 / r, -2.0 * r)], false),
        Base::Exp { .. } => (vec![(0.5 / r, 2.0 * r), (-0.5 / r, 0.0)], false),
        Base::Const | Base::Linear => (Vec::new(), true),
    };
    let sigma = match base {
        Base::Exp { sigma } => sigma,
        _ => 0.0,
    };
    let kernel_sup = |len: f64| -> f64 {
        if linear {
            len
        } else {
            // both kernels are monotone in z - y
            terms
                .iter()
                .map(|&(c, b)| c * (b * len).exp())
                .sum::<f64>()
                .abs()
        }
    };

    // mass of the neglected part beyond z0, assuming dq decays exponentially
    let end_mass = {
        let (a, b) = (dq[0].abs(), dq[1].abs());
        if a == 0.0 {
            0.0
        } else {
            let rho = (a / b.max(f64::MIN_POSITIVE)).ln() / h;
            let rho = -rho;
            if !(rho > 0.0) {
                return Err(Error::Domain(format!(
                    "potential does not approach its asymptote at the anchoring end (dq = {a:e})"
                )));
            }
            let k = if linear {
                (1.0 + nodes[0].abs()) / rho
            } else {
                0.5 / r
            };
            k * a / rho
        }
    };
    if end_mass > END_MASS_TOL {
        return Err(Error::Domain(format!(
            "grid too short: kernel mass beyond the anchoring end is {end_mass:.3e} (> {END_MASS_TOL:e})"
        )));
    }
    let kernel_mass: f64 =
        dq.iter().map(|v| v.abs() * h).sum::<f64>() * kernel_sup(z.z_max - z.z_min);

    // each window restarts from the local state (u, u'); inside a window
    // the unknown is w = exp(-σ(z - z_s)) u and the sums start at zero
    let mut u = vec![0.0; n];
    let mut du = vec![0.0; n];
    (u[0], du[0]) = match base {
        Base::Exp { sigma } => ((sigma * nodes[0]).exp(), sigma * (sigma * nodes[0]).exp()),
        Base::Const => (1.0, 0.0),
        Base::Linear => (nodes[0], 1.0),
    };
    let nt = terms.len();
    let mut w = [0.0; WINDOW + 1];
    let mut dw = [0.0; WINDOW + 1];
    let mut acc = vec![[0.0f64; 2]; WINDOW + 1];

    let mut ratios = Vec::new();
    let mut max_sweeps = 0;
    let mut final_change: f64 = 0.0;
    let mut windows = 0;

    let mut start = 0;
    while start + 1 < n {
        let end = (start + WINDOW).min(n - 1);
        let len = end - start;
        windows += 1;
        let (us, dus) = (u[start], du[start]);
        // homogeneous part of the scaled unknown and its derivative at x
        let hom = |x: f64| -> (f64, f64) {
            if linear {
                (us + dus * x, dus)
            } else {
                let ca = 0.5 * (us + dus / r);
                let cb = 0.5 * (us - dus / r);
                if sigma > 0.0 {
                    let e = (-2.0 * r * x).exp();
                    (ca + cb * e, -2.0 * r * cb * e)
                } else {
                    let e = (2.0 * r * x).exp();
                    (ca * e + cb, 2.0 * r * ca * e)
                }
            }
        };
        let x = |k: isize| nodes[(start as isize + k) as usize] - nodes[start];
        // scaled samples before the window feed the quadrature stencil
        let back = start.min(5);
        let prev: Vec<f64> = (0..back)
            .map(|j| {
                let i = start - back + j;
                (-sigma * (nodes[i] - nodes[start])).exp() * u[i]
            })
            .collect();
        w[0] = us;
        dw[0] = dus - sigma * us;
        acc[0] = [0.0; 2];
        // initial guess: extend the last value along its slope
        for k in 1..=len {
            w[k] = w[0] + dw[0] * x(k as isize);
        }
        let mut last = f64::INFINITY;
        let mut rising = 0;
        let mut sweeps = 0;
        loop {
            sweeps += 1;
            let mut change: f64 = 0.0;
            let mut scale: f64 = 0.0;
            // Picard: the whole sweep reads the previous iterate
            let w_old = w;
            for k in 0..len {
                let m = (start + k + 2).min(6);
                let wts = am_weights(m);
                let first = k as isize + 2 - m as isize;
                let f = |i: isize| -> f64 {
                    let wi = if i < 0 {
                        prev[(back as isize + i) as usize]
                    } else {
                        w_old[i as usize]
                    };
                    dq[(start as isize + i) as usize] * wi
                };
                let xk = x(k as isize + 1);
                let mut next = [0.0f64; 2];
                if linear {
                    // P = ∫ f, S = ∫ (z - y) f
                    let mut p_inc = 0.0;
                    let mut s_inc = 0.0;
                    for (j, wj) in wts.iter().enumerate() {
                        let i = first + j as isize;
                        let fi = f(i);
                        p_inc += wj * fi;
                        s_inc += wj * (xk - x(i)) * fi;
                    }
                    next[0] = acc[k][0] + h * p_inc;
                    next[1] = acc[k][1] + h * acc[k][0] + h * s_inc;
                } else {
                    for (t, &(_, beta)) in terms.iter().enumerate() {
                        let mut inc = 0.0;
                        for (j, wj) in wts.iter().enumerate() {
                            let i = first + j as isize;
                            inc += wj * (beta * (xk - x(i))).exp() * f(i);
                        }
                        next[t] = (beta * h).exp() * acc[k][t] + h * inc;
                    }
                }
                acc[k + 1] = next;
                let (g0, g1) = hom(xk);
                let (val, der) = if linear {
                    (g0 + next[1], g1 + next[0])
                } else {
                    let mut v = g0;
                    let mut d = g1;
                    for t in 0..nt {
                        v += terms[t].0 * next[t];
                        d += terms[t].0 * terms[t].1 * next[t];
                    }
                    (v, d)
                };
                change = change.max((val - w_old[k + 1]).abs());
                scale = scale.max(val.abs());
                w[k + 1] = val;
                dw[k + 1] = der;
            }
            let rel = if scale > 0.0 { change / scale } else { 0.0 };
            if !rel.is_finite() {
                return Err(Error::IterationFailure {
                    kernel_mass: window_mass(dq, start, end, h, &kernel_sup, &nodes),
                    iterations: sweeps,
                    last_change: rel,
                });
            }
            if last.is_finite() && last > 0.0 && rel > 0.0 {
                ratios.push(rel / last);
            }
            if rel <= PICARD_TOL {
                final_change = final_change.max(rel);
                break;
            }
            if rel > last {
                rising += 1;
            } else {
                rising = 0;
            }
            if rising >= 3 || sweeps >= MAX_SWEEPS {
                return Err(Error::IterationFailure {
                    kernel_mass: window_mass(dq, start, end, h, &kernel_sup, &nodes),
                    iterations: sweeps,
                    last_change: rel,
                });
            }
            last = rel;
        }
        max_sweeps = max_sweeps.max(sweeps);
        // undo the local exp(σx) scaling
        for k in 1..=len {
            let e = (sigma * x(k as isize)).exp();
            u[start + k] = e * w[k];
            du[start + k] = e * (sigma * w[k] + dw[k]);
        }
        start = end;
    }

    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let contraction_rate = ratios.get(ratios.len() / 2).copied().unwrap_or(0.0);

    Ok(March {
        u,
        du,
        stats: PicardStats {
            windows,
            max_sweeps,
            final_change,
            contraction_rate,
            kernel_mass,
            end_mass,
        },
    })
}

fn window_mass(
    dq: &[f64],
    start: usize,
    end: usize,
    h: f64,
    kernel_sup: &dyn Fn(f64) -> f64,
    nodes: &[f64],
) -> f64 {
    let len = nodes[end] - nodes[start];
    dq[start..=end].iter().map(|v| v.abs() * h).sum::<f64>() * kernel_sup(len)
}

/// Anchors at the right end by reflecting `z → -z`.
fn march_from_right(z: &UniformGrid, dq: &[f64], r: f64, base: Base) -> Result<March> {
    let n = z.n;
    let t = UniformGrid::new(-z.z_max, -z.z_min, n)?;
    let dq_rev: Vec<f64> = dq.iter().rev().copied().collect();
    let (tb, flip) = match base {
        Base::Exp { sigma } => (Base::Exp { sigma: -sigma }, 1.0),
        Base::Const => (Base::Const, 1.0),
        Base::Linear => (Base::Linear, -1.0),
    };
    let m = march(&t, &dq_rev, r, tb)?;
    let u = m.u.iter().rev().map(|v| flip * v).collect();
    let du = m.du.iter().rev().map(|v| -flip * v).collect();
    Ok(March {
        u,
        du,
        stats: m.stats,
    })
}

/// Relative residual of `a u'' = V u` by sixth-order differences, skipping
/// `skip` nodes at each end.
fn ode_residual(u: &[f64], h: f64, a: f64, v: &[f64], skip: usize) -> f64 {
    const C: [f64; 7] = [
        1.0 / 90.0,
        -3.0 / 20.0,
        3.0 / 2.0,
        -49.0 / 18.0,
        3.0 / 2.0,
        -3.0 / 20.0,
        1.0 / 90.0,
    ];
    let n = u.len();
    let vmax = v.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let lo = skip.max(3);
    let mut worst: f64 = 0.0;
    for i in lo..n.saturating_sub(lo) {
        let d2: f64 = (0..7).map(|j| C[j] * u[i + j - 3]).sum::<f64>() / (h * h);
        let local = (i - 3..=i + 3).fold(0.0_f64, |m, j| m.max(u[j].abs()));
        if local == 0.0 {
            continue;
        }
        let res = (a * d2 - v[i] * u[i]).abs() / (local * vmax);
        worst = worst.max(res);
    }
    worst
}

/// `kappa(ŝ(y)) = (1-ŝ)(1-2ŝ)` evaluated through `1-ŝ = logistic(-y)`.
fn kappa(y: f64) -> f64 {
    let t = logistic(-y);
    t * (2.0 * t - 1.0)
}

/// One of the four model-equation solutions `û1..û4` of
/// `(1+A) u'' - (1-ŝ)(1-2ŝ) u = 0` on a grid in `y`.
pub fn volterra_fundamental(
    kind: FundamentalKind,
    a: f64,
    grid: &UniformGrid,
) -> Result<VolterraSolution> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidParams(format!("A = {a} must be positive")));
    }
    let coef = 1.0 + a;
    let nodes: Vec<f64> = grid.nodes().collect();
    let p: Vec<f64> = nodes.iter().map(|&y| kappa(y)).collect();
    let q: Vec<f64> = p.iter().map(|v| v / coef).collect();
    let r = 1.0 / coef.sqrt();
    // kappa - 1 = s(2s - 3), without cancellation as s -> 0
    let left_dq = || -> Vec<f64> {
        nodes
            .iter()
            .map(|&y| {
                let s = logistic(y);
                s * (2.0 * s - 3.0) / coef
            })
            .collect()
    };
    let (m, tails) = match kind {
        FundamentalKind::U1 => {
            let dq = left_dq();
            let m = march(grid, &dq, r, Base::Exp { sigma: r })?;
            (m, [Tail::exp(0.0, r), Tail::Linear { slope: f64::NAN }])
        }
        FundamentalKind::U2 => {
            let dq = left_dq();
            let m = march(grid, &dq, r, Base::Exp { sigma: -r })?;
            (m, [Tail::exp(0.0, -r), Tail::Linear { slope: f64::NAN }])
        }
        FundamentalKind::U3 => {
            let m = march_from_right(grid, &q, 0.0, Base::Const)?;
            (m, [Tail::exp(0.0, -r), Tail::exp(1.0, 1.0)])
        }
        FundamentalKind::U4 => {
            let m = march_from_right(grid, &q, 0.0, Base::Linear)?;
            (m, [Tail::exp(0.0, -r), Tail::Linear { slope: 1.0 }])
        }
    };
    let tails = fill_slopes(tails, &m);
    let residual = ode_residual(&m.u, grid.h(), coef, &p, 10);
    Ok(VolterraSolution {
        u: GridFn::new(*grid, m.u, tails)?,
        du: m.du,
        stats: m.stats,
        residual,
    })
}

fn fill_slopes(mut tails: [Tail; 2], m: &March) -> [Tail; 2] {
    for (side, t) in tails.iter_mut().enumerate() {
        if let Tail::Linear { slope } = t {
            if slope.is_nan() {
                let i = if side == 0 { 0 } else { m.du.len() - 1 };
                *slope = m.du[i];
            }
        }
    }
    tails
}

/// Independent pair for the shear (`kappa`) or twist (`iota`) layer operator.
#[derive(Debug, Clone)]
pub struct FundamentalPair {
    pub kind: PairKind,
    /// Bounded as `z → -∞`.
    pub u_minus: GridFn,
    /// Bounded as `z → +∞`.
    pub u_plus: GridFn,
    pub du_minus: Vec<f64>,
    pub du_plus: Vec<f64>,
    /// `u₋' u₊ - u₊' u₋`, median over the well-conditioned nodes.
    pub wronskian: f64,
    /// Relative spread of the pointwise Wronskian over those nodes.
    pub wronskian_variation: f64,
    /// Fraction of nodes where the Wronskian could be evaluated.
    pub wronskian_coverage: f64,
    pub residual: f64,
    pub stats: [PicardStats; 2],
}

/// Largest cancellation ratio accepted when sampling a Wronskian.
pub const WRONSKIAN_CONDITION: f64 = 1e6;

/// Pointwise Wronskian `a' b - b' a` where the two products do not cancel
/// catastrophically. Returns (median, relative spread, coverage).
pub fn wronskian_profile(a: &[f64], da: &[f64], b: &[f64], db: &[f64]) -> (f64, f64, f64) {
    let w: Vec<f64> = (0..a.len()).map(|i| da[i] * b[i] - db[i] * a[i]).collect();
    let mut sorted: Vec<f64> = w.clone();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let rough = sorted[sorted.len() / 2];
    let good: Vec<f64> = (0..a.len())
        .filter(|&i| {
            let mag = (da[i] * b[i]).abs() + (db[i] * a[i]).abs();
            w[i].is_finite() && mag / rough.abs() <= WRONSKIAN_CONDITION
        })
        .map(|i| w[i])
        .collect();
    if good.is_empty() {
        return (rough, f64::INFINITY, 0.0);
    }
    let mut g = good.clone();
    g.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let med = g[g.len() / 2];
    let spread = (g[g.len() - 1] - g[0]) / med.abs();
    (med, spread, good.len() as f64 / a.len() as f64)
}

/// Builds `(u₋, u₊)` for `-(1+L/2) u'' + kappa(s) u = 0` or
/// `-u'' + iota(s) u = 0` on a `z` grid.
pub fn fundamental_pair(
    kind: PairKind,
    ctx: &LayerContext,
    grid: &UniformGrid,
) -> Result<FundamentalPair> {
    let nodes: Vec<f64> = grid.nodes().collect();
    let s: Vec<f64> = nodes
        .iter()
        .map(|&z| s_profile(z, ctx, 0))
        .collect::<Result<_>>()?;
    match kind {
        PairKind::Kappa => {
            // y = γ z maps the layer profile onto the model profile
            let g = ctx.gamma;
            let ygrid = grid.scaled(g);
            let u1 = volterra_fundamental(FundamentalKind::U1, ctx.a_model, &ygrid)?;
            let u3 = volterra_fundamental(FundamentalKind::U3, ctx.a_model, &ygrid)?;
            let du_minus: Vec<f64> = u1.du.iter().map(|v| g * v).collect();
            let du_plus: Vec<f64> = u3.du.iter().map(|v| g * v).collect();
            let coef = ctx.shear_stiffness();
            let v: Vec<f64> = nodes.iter().map(|&z| kappa(g * z)).collect();
            let rm = ode_residual(&u1.u.values, grid.h(), coef, &v, 10);
            let rp = ode_residual(&u3.u.values, grid.h(), coef, &v, 10);
            let rate = 1.0 / coef.sqrt();
            let u_minus = GridFn::new(
                *grid,
                u1.u.values,
                [
                    Tail::exp(0.0, rate),
                    Tail::Linear {
                        slope: *du_minus.last().unwrap(),
                    },
                ],
            )?;
            let u_plus = GridFn::new(
                *grid,
                u3.u.values,
                [Tail::exp(0.0, -rate), Tail::exp(1.0, g)],
            )?;
            let (w, var, cov) =
                wronskian_profile(&u_minus.values, &du_minus, &u_plus.values, &du_plus);
            Ok(FundamentalPair {
                kind,
                u_minus,
                u_plus,
                du_minus,
                du_plus,
                wronskian: w,
                wronskian_variation: var,
                wronskian_coverage: cov,
                residual: rm.max(rp),
                stats: [u1.stats, u3.stats],
            })
        }
        PairKind::Iota => {
            let v: Vec<f64> = s.iter().map(|&x| potential(Potential::Iota, x)).collect();
            // iota - 1 = s(6 + 2s), iota - 9 = -2(1-s)(s + 4)
            let dq_left: Vec<f64> = s.iter().map(|&x| x * (6.0 + 2.0 * x)).collect();
            let dq_right: Vec<f64> = nodes
                .iter()
                .zip(&s)
                .map(|(&z, &x)| -2.0 * logistic(-ctx.gamma * z) * (x + 4.0))
                .collect();
            let m = march(grid, &dq_left, 1.0, Base::Exp { sigma: 1.0 })?;
            let p = march_from_right(grid, &dq_right, 3.0, Base::Exp { sigma: -3.0 })?;
            let rm = ode_residual(&m.u, grid.h(), 1.0, &v, 10);
            let rp = ode_residual(&p.u, grid.h(), 1.0, &v, 10);
            let (w, var, cov) = wronskian_profile(&m.u, &m.du, &p.u, &p.du);
            Ok(FundamentalPair {
                kind,
                u_minus: GridFn::new(*grid, m.u, [Tail::exp(0.0, 1.0), Tail::exp(0.0, -3.0)])?,
                u_plus: GridFn::new(*grid, p.u, [Tail::exp(0.0, -1.0), Tail::exp(0.0, 3.0)])?,
                du_minus: m.du,
                du_plus: p.du,
                wronskian: w,
                wronskian_variation: var,
                wronskian_coverage: cov,
                residual: rm.max(rp),
                stats: [m.stats, p.stats],
            })
        }
    }
}
