//! One-dimensional transition layers.
//!
//! The heteroclinic profile `s(z)` connecting the isotropic state (`s = 0`)
//! to the nematic well (`s = 1`), the three layer potentials, fundamental
//! solutions built by Volterra iteration, and Green's-function solvers for
//! the linearized layer equations.

mod grid;
mod quad;
pub mod solve;
mod volterra;

pub use grid::{GridFn, Side, Tail, UniformGrid};
pub use quad::{cumulative, simpson, tail_integral};
pub use solve::{solve_layer, LayerKind};
pub use volterra::{
    fundamental_pair, model_profile, volterra_fundamental, wronskian_profile, FundamentalKind,
    FundamentalPair, PairKind, PicardStats, VolterraSolution,
};

use crate::error::{Error, Result};

/// Parameters of the layer problem derived from `L`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LayerContext {
    pub l: f64,
    /// Decay rate `(1 + 2L/3)^(-1/2)`.
    pub gamma: f64,
    /// Model-equation parameter `(-L/6)/(1 + 2L/3)`.
    pub a_model: f64,
}

impl LayerContext {
    pub fn new(l: f64) -> Result<Self> {
        if !(l > -1.5 && l < 0.0) {
            return Err(Error::InvalidParams(format!(
                "L = {l} must lie in (-3/2, 0)"
            )));
        }
        let k = 1.0 + 2.0 * l / 3.0;
        Ok(LayerContext {
            l,
            gamma: 1.0 / k.sqrt(),
            a_model: (-l / 6.0) / k,
        })
    }

    /// `1 + 2L/3`.
    pub fn stiffness(&self) -> f64 {
        1.0 + 2.0 * self.l / 3.0
    }

    /// `1 + L/2`, the coefficient in front of the tangential-shear channels.
    pub fn shear_stiffness(&self) -> f64 {
        1.0 + self.l / 2.0
    }

    /// Uniform grid on `[-40/gamma, 40/gamma]` with 4001 nodes.
    pub fn default_grid(&self) -> UniformGrid {
        let z = 40.0 / self.gamma;
        UniformGrid::new(-z, z, 4001).expect("static grid is valid")
    }
}

/// `s(z)` and its first three derivatives.
pub fn s_profile(z: f64, ctx: &LayerContext, order: u8) -> Result<f64> {
    let g = ctx.gamma;
    let s = logistic(g * z);
    let t = logistic(-g * z);
    let st = s * t;
    match order {
        0 => Ok(s),
        1 => Ok(g * st),
        2 => Ok(g * g * st * (t - s)),
        3 => Ok(g * g * g * st * potential(Potential::Theta, s)),
        _ => Err(Error::Domain(format!(
            "profile derivative order {order} > 3"
        ))),
    }
}

/// `1 / (1 + e^{-x})` without cancellation in either tail.
pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Scalar bulk force along the uniaxial ray, `-2s^3 + 3s^2 - s`.
pub fn scalar_force(s: f64) -> f64 {
    -2.0 * s * s * s + 3.0 * s * s - s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Potential {
    Theta,
    Kappa,
    Iota,
}

/// Layer potentials `theta = 1 - 6s + 6s^2`, `kappa = 1 - 3s + 2s^2`,
/// `iota = 1 + 6s + 2s^2`.
pub fn potential(kind: Potential, s: f64) -> f64 {
    match kind {
        Potential::Theta => 1.0 - 6.0 * s + 6.0 * s * s,
        Potential::Kappa => 1.0 - 3.0 * s + 2.0 * s * s,
        Potential::Iota => 1.0 + 6.0 * s + 2.0 * s * s,
    }
}

/// Samples `s^(order)` on a grid with its tail metadata.
pub fn profile_gridfn(ctx: &LayerContext, grid: &UniformGrid, order: u8) -> Result<GridFn> {
    let values = grid
        .nodes()
        .map(|z| s_profile(z, ctx, order))
        .collect::<Result<Vec<_>>>()?;
    let g = ctx.gamma;
    let right_limit = if order == 0 { 1.0 } else { 0.0 };
    GridFn::new(
        *grid,
        values,
        [Tail::exp(0.0, g), Tail::exp(right_limit, g)],
    )
}

/// `∫ s'^2 dz` by composite Simpson on the grid.
pub fn profile_energy_integral(ctx: &LayerContext, grid: &UniformGrid) -> f64 {
    let v: Vec<f64> = grid
        .nodes()
        .map(|z| {
            let d = s_profile(z, ctx, 1).unwrap();
            d * d
        })
        .collect();
    simpson(&v, grid.h())
}

#[cfg(test)]
mod tests {
    use super::*;

    const LS: [f64; 4] = [-1.4, -1.0, -0.5, -0.1];

    #[test]
    fn context_invariants() {
        for l in LS {
            let c = LayerContext::new(l).unwrap();
            assert!((c.gamma * c.gamma * c.stiffness() - 1.0).abs() < 1e-14);
            assert!(c.a_model > 0.0);
            let ratio = c.shear_stiffness() * c.gamma * c.gamma;
            assert!((ratio - 1.0 - c.a_model).abs() < 1e-14);
        }
        assert!(LayerContext::new(0.2).is_err());
    }

    #[test]
    fn profile_values() {
        let c = LayerContext::new(-0.5).unwrap();
        assert_eq!(s_profile(0.0, &c, 0).unwrap(), 0.5);
        assert!(s_profile(0.0, &c, 4).is_err());
        for i in 0..200 {
            let z = -40.0 + 0.4 * i as f64;
            let s = s_profile(z, &c, 0).unwrap();
            let ds = s_profile(z, &c, 1).unwrap();
            assert!((ds - c.gamma * s * (1.0 - s)).abs() < 1e-13);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let c = LayerContext::new(-1.0).unwrap();
        let h = 1e-4;
        for z in [-3.0, -0.7, 0.0, 0.4, 2.5] {
            for k in 0..3u8 {
                let fd = (s_profile(z + h, &c, k).unwrap() - s_profile(z - h, &c, k).unwrap())
                    / (2.0 * h);
                let an = s_profile(z, &c, k + 1).unwrap();
                assert!((fd - an).abs() < 1e-7, "order {k} at {z}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn potentials() {
        assert_eq!(potential(Potential::Theta, 0.0), 1.0);
        assert_eq!(potential(Potential::Theta, 1.0), 1.0);
        assert_eq!(potential(Potential::Kappa, 0.0), 1.0);
        assert_eq!(potential(Potential::Kappa, 1.0), 0.0);
        assert_eq!(potential(Potential::Iota, 0.0), 1.0);
        assert_eq!(potential(Potential::Iota, 1.0), 9.0);
        for i in 0..=100 {
            let s = i as f64 / 100.0;
            let f = (2.0 * s - 1.0) * (s - 1.0);
            assert!((potential(Potential::Kappa, s) - f).abs() < 1e-15);
            assert!(potential(Potential::Iota, s) >= 1.0);
        }
    }

    #[test]
    fn energy_integral() {
        for l in LS {
            let c = LayerContext::new(l).unwrap();
            let v = profile_energy_integral(&c, &c.default_grid());
            assert!((v - c.gamma / 6.0).abs() < 1e-10, "{v}");
        }
    }
}
