//! Bounded solutions of the three linearized layer equations
//!
//! ```text
//! type0: -(1+2L/3) s0'' + theta(s) s0 = f0
//! type1: -(1+L/2)  s1'' + kappa(s) s1 = f1
//! type2:          -s2'' + iota(s)  s2 = f2
//! ```
//!
//! by their explicit quadrature formulas. Improper integrals are truncated
//! at the grid ends and completed with [`tail_integral`], i.e. the integrand
//! is continued as `g(z_end) exp(-rate |z - z_end|)` with the rate implied by
//! the recorded tails of the data.

use super::{
    cumulative, fundamental_pair, potential, s_profile, tail_integral, GridFn, LayerContext,
    PairKind, Potential, Side, Tail,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum LayerKind {
    Type0,
    Type1,
    Type2,
}

/// Relative tolerance for treating the type0 compatibility integral as zero.
pub const COMPATIBILITY_TOL: f64 = 1e-8;

fn tail_rate(t: Tail) -> f64 {
    match t {
        Tail::Exp { rate, .. } => rate,
        Tail::Linear { .. } => 0.0,
    }
}

/// Decay rate of `(data - limit)`, capped by the rate of a factor it multiplies.
fn combined_rate(data: Tail, factor_rate: f64) -> f64 {
    match data {
        Tail::Exp { limit: 0.0, rate } => rate + factor_rate,
        _ => factor_rate,
    }
}

fn check_decays(rhs: &GridFn, side: Side, what: &str) -> Result<()> {
    let t = rhs.tail(side);
    if !t.decays_to_zero() {
        return Err(Error::Domain(format!(
            "{what}: right-hand side must decay exponentially at the {side:?} end, recorded {t:?}"
        )));
    }
    let i = match side {
        Side::Left => 0,
        Side::Right => rhs.values.len() - 1,
    };
    if rhs.values[i].abs() > 1e-6 * (1.0 + rhs.sup_norm()) {
        return Err(Error::Domain(format!(
            "{what}: right-hand side is {:e} at the {side:?} end",
            rhs.values[i]
        )));
    }
    Ok(())
}

fn check_converges(rhs: &GridFn, side: Side, what: &str) -> Result<f64> {
    match rhs.tail(side) {
        Tail::Exp { limit, rate } if rate > 0.0 => Ok(limit),
        t => Err(Error::Domain(format!(
            "{what}: right-hand side must converge at the {side:?} end, recorded {t:?}"
        ))),
    }
}

/// Solves the layer equation of the given type for `rhs` on `rhs.grid`.
///
/// For `Type0` the solution is normalized by `s0(0) = 0` and the
/// compatibility integral `∫ f0 s'` must vanish. `boundary` optionally
/// overrides the limits used for the tail corrections; the limit of a
/// `Type1` solution at `+∞` is always computed, never imposed.
pub fn solve_layer(
    kind: LayerKind,
    rhs: &GridFn,
    ctx: &LayerContext,
    boundary: Option<[f64; 2]>,
) -> Result<GridFn> {
    match kind {
        LayerKind::Type0 => solve_type0(rhs, ctx, boundary),
        LayerKind::Type1 => solve_green(PairKind::Kappa, rhs, ctx),
        LayerKind::Type2 => solve_green(PairKind::Iota, rhs, ctx),
    }
}

fn solve_type0(rhs: &GridFn, ctx: &LayerContext, boundary: Option<[f64; 2]>) -> Result<GridFn> {
    check_decays(rhs, Side::Left, "type0")?;
    let f_plus = match boundary {
        Some([_, r]) => r,
        None => check_converges(rhs, Side::Right, "type0")?,
    };
    let grid = rhs.grid;
    let h = grid.h();
    let n = grid.n;
    let g = ctx.gamma;
    let a = ctx.stiffness();
    let nodes: Vec<f64> = grid.nodes().collect();
    let ds: Vec<f64> = nodes
        .iter()
        .map(|&z| s_profile(z, ctx, 1))
        .collect::<Result<_>>()?;
    let prod: Vec<f64> = ds.iter().zip(&rhs.values).map(|(d, f)| d * f).collect();

    let left_rate = combined_rate(rhs.tail(Side::Left), g);
    let right_rate = combined_rate(rhs.tail(Side::Right), g);
    let left_tail = tail_integral(prod[0], left_rate);
    let right_tail = tail_integral(prod[n - 1], right_rate);

    // running integrals from both ends, each free of cancellation in its own tail
    let c = cumulative(&prod, h, 0);
    let cr = cumulative(&prod, h, n - 1);
    let total = c[n - 1] + left_tail + right_tail;
    let fnorm = rhs.sup_norm();
    let tol = COMPATIBILITY_TOL * (1.0 + fnorm);
    if total.abs() > tol {
        return Err(Error::Solvability {
            integral: total,
            tolerance: tol,
        });
    }
    let from_left: Vec<f64> = c.iter().map(|v| v + left_tail).collect();
    let from_right: Vec<f64> = cr.iter().map(|v| -v + right_tail).collect();

    // I(y) = ∫_y^∞ s' f0, taken as -∫_{-∞}^y s' f0 left of the origin
    let k0 = nearest(&nodes, 0.0);
    let inner: Vec<f64> = (0..n)
        .map(|i| if i < k0 { -from_left[i] } else { from_right[i] })
        .collect();
    let j: Vec<f64> = (0..n).map(|i| inner[i] / (ds[i] * ds[i])).collect();
    // ∫_0^z J, signed, accumulated outward from the origin
    let mut outer = cumulative(&j, h, k0);
    let shift = offset_integral(&j, &nodes, k0);
    for v in outer.iter_mut() {
        *v -= shift;
    }
    let values: Vec<f64> = (0..n).map(|i| ds[i] * outer[i] / a).collect();

    let limit = f_plus / potential(Potential::Theta, 1.0);
    let rr = tail_rate(rhs.tail(Side::Right)).min(g);
    let lr = tail_rate(rhs.tail(Side::Left)).min(g);
    GridFn::new(grid, values, [Tail::exp(0.0, lr), Tail::exp(limit, rr)])
}

fn nearest(nodes: &[f64], z: f64) -> usize {
    let mut best = 0;
    for (i, v) in nodes.iter().enumerate() {
        if (v - z).abs() < (nodes[best] - z).abs() {
            best = i;
        }
    }
    best
}

/// `∫_0^{z_k} J` by the cubic through four nodes around `z_k`.
fn offset_integral(j: &[f64], nodes: &[f64], k: usize) -> f64 {
    let z = nodes[k];
    if z == 0.0 {
        return 0.0;
    }
    let lo = k.saturating_sub(1).min(j.len() - 4);
    let xs = &nodes[lo..lo + 4];
    let ys = &j[lo..lo + 4];
    // Gauss-Legendre on [0, z] applied to the Lagrange interpolant
    let gl = [
        (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
        (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
        (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
        (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    ];
    let interp = |x: f64| -> f64 {
        (0..4)
            .map(|a| {
                let mut l = 1.0;
                for b in 0..4 {
                    if a != b {
                        l *= (x - xs[b]) / (xs[a] - xs[b]);
                    }
                }
                l * ys[a]
            })
            .sum()
    };
    gl.iter()
        .map(|&(t, w)| w * interp(0.5 * z * (t + 1.0)))
        .sum::<f64>()
        * 0.5
        * z
}

fn solve_green(pair_kind: PairKind, rhs: &GridFn, ctx: &LayerContext) -> Result<GridFn> {
    let what = match pair_kind {
        PairKind::Kappa => "type1",
        PairKind::Iota => "type2",
    };
    check_decays(rhs, Side::Left, what)?;
    let f_plus = match pair_kind {
        PairKind::Kappa => {
            check_decays(rhs, Side::Right, what)?;
            0.0
        }
        PairKind::Iota => check_converges(rhs, Side::Right, what)?,
    };
    let grid = rhs.grid;
    let n = grid.n;
    let h = grid.h();
    let pair = fundamental_pair(pair_kind, ctx, &grid)?;
    let (coef, rate_minus, rate_plus) = match pair_kind {
        PairKind::Kappa => {
            let c = ctx.shear_stiffness();
            (c, 1.0 / c.sqrt(), 0.0)
        }
        PairKind::Iota => (1.0, 1.0, 3.0),
    };
    let um = &pair.u_minus.values;
    let up = &pair.u_plus.values;
    let f = &rhs.values;

    // I₋(z) = ∫_{-∞}^z u₋ f, I₊(z) = ∫_z^∞ u₊ f
    let a: Vec<f64> = (0..n).map(|i| um[i] * f[i]).collect();
    let b: Vec<f64> = (0..n).map(|i| up[i] * f[i]).collect();
    let left_rate = tail_rate(rhs.tail(Side::Left)) + rate_minus;
    let right_rate = match pair_kind {
        PairKind::Kappa => tail_rate(rhs.tail(Side::Right)),
        PairKind::Iota => rate_plus,
    };
    let ca = cumulative(&a, h, 0);
    let cb = cumulative(&b, h, n - 1);
    let left_tail = tail_integral(a[0], left_rate);
    let right_tail = tail_integral(b[n - 1], right_rate);
    let w = coef * pair.wronskian;
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let im = ca[i] + left_tail;
            let ip = -cb[i] + right_tail;
            (up[i] * im + um[i] * ip) / w
        })
        .collect();

    let g = ctx.gamma;
    let lr = tail_rate(rhs.tail(Side::Left)).min(rate_minus);
    let right = match pair_kind {
        PairKind::Kappa => {
            let limit = (ca[n - 1] + left_tail) / w;
            Tail::exp(limit, tail_rate(rhs.tail(Side::Right)).min(g))
        }
        PairKind::Iota => {
            let limit = f_plus / potential(Potential::Iota, 1.0);
            Tail::exp(
                limit,
                tail_rate(rhs.tail(Side::Right)).min(g).min(rate_plus),
            )
        }
    };
    GridFn::new(grid, values, [Tail::exp(0.0, lr), right])
}

/// `sup |−a u'' + V(s) u − f|` by sixth-order differences, skipping
/// `skip` nodes at each end.
pub fn layer_residual(
    kind: LayerKind,
    sol: &GridFn,
    rhs: &GridFn,
    ctx: &LayerContext,
    skip: usize,
) -> f64 {
    const C: [f64; 7] = [
        1.0 / 90.0,
        -3.0 / 20.0,
        3.0 / 2.0,
        -49.0 / 18.0,
        3.0 / 2.0,
        -3.0 / 20.0,
        1.0 / 90.0,
    ];
    let (a, pot) = match kind {
        LayerKind::Type0 => (ctx.stiffness(), Potential::Theta),
        LayerKind::Type1 => (ctx.shear_stiffness(), Potential::Kappa),
        LayerKind::Type2 => (1.0, Potential::Iota),
    };
    let h = sol.grid.h();
    let u = &sol.values;
    let lo = skip.max(3);
    let mut worst: f64 = 0.0;
    for i in lo..u.len().saturating_sub(lo) {
        let d2: f64 = (0..7).map(|j| C[j] * u[i + j - 3]).sum::<f64>() / (h * h);
        let s = s_profile(sol.grid.node(i), ctx, 0).unwrap();
        let r = -a * d2 + potential(pot, s) * u[i] - rhs.values[i];
        worst = worst.max(r.abs());
    }
    worst
}
