use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use rayon::prelude::*;

use super::{glued_order, Geometry, GlueConfig};
use crate::error::{Error, Result};
use crate::field::{PeriodicGrid, QField};
use crate::layer::LayerContext;
use crate::tensor::{dot3, Mat3, ModelParams, SymTraceless3, Vec3};

type DirectorFn = dyn Fn(&Vec3, f64) -> Vec3 + Send + Sync;

/// Director field `n(x, t)` carried by the approximate solution.
#[derive(Clone)]
pub enum DirectorField {
    /// `n = ∇d` (strong anchoring everywhere).
    Normal,
    Constant(Vec3),
    /// `n = sin φ ∇d + cos φ axis` with `φ = (π/2)(1 - S(|d| / width))`,
    /// `S` the quintic smoothstep: the normal on the interface, turning to
    /// `axis` (orthogonal to `∇d`) at distance `width`.
    Escaped {
        width: f64,
        axis: Vec3,
    },
    /// Static user field, evaluated as given.
    Custom(Arc<DirectorFn>),
}

impl std::fmt::Debug for DirectorField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DirectorField::Normal => write!(f, "Normal"),
            DirectorField::Constant(v) => write!(f, "Constant({v:?})"),
            DirectorField::Escaped { width, axis } => {
                write!(f, "Escaped {{ width: {width}, axis: {axis:?} }}")
            }
            DirectorField::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

fn smoothstep(u: f64) -> f64 {
    u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
}

fn smoothstep_d1(u: f64) -> f64 {
    30.0 * u * u * (1.0 - u) * (1.0 - u)
}

impl DirectorField {
    /// `n` and `∂_t n`.
    pub fn eval(&self, geom: &Geometry, x: &Vec3, t: f64) -> Result<(Vec3, Vec3)> {
        match self {
            DirectorField::Normal => Ok((geom.signed_distance(x, t)?.grad, [0.0; 3])),
            DirectorField::Constant(v) => Ok((*v, [0.0; 3])),
            DirectorField::Custom(f) => Ok((f(x, t), [0.0; 3])),
            DirectorField::Escaped { width, axis } => {
                let d = geom.d(x, t)?;
                let u = d.abs() / width;
                if u >= 1.0 {
                    return Ok((*axis, [0.0; 3]));
                }
                let phi = FRAC_PI_2 * (1.0 - smoothstep(u));
                let dist = geom.signed_distance(x, t)?;
                let (s, c) = phi.sin_cos();
                let rate = -FRAC_PI_2 * smoothstep_d1(u) * d.signum() / width * dist.dt;
                let n = std::array::from_fn(|k| s * dist.grad[k] + c * axis[k]);
                let dn = std::array::from_fn(|k| rate * (c * dist.grad[k] - s * axis[k]));
                Ok((n, dn))
            }
        }
    }
}

/// Glued leading-order approximate solution
/// `Q = [outer + η(d/δ)(s(d/ε) - outer)] (nn - I/3)`.
#[derive(Debug, Clone)]
pub struct ApproxSolution {
    pub geometry: Geometry,
    pub glue: GlueConfig,
    pub director: DirectorField,
    pub params: ModelParams,
    ctx: LayerContext,
}

impl ApproxSolution {
    pub fn new(
        geometry: Geometry,
        glue: GlueConfig,
        director: DirectorField,
        params: ModelParams,
    ) -> Result<Self> {
        params.validate()?;
        glue.check_resolves(params.epsilon)?;
        Ok(ApproxSolution {
            geometry,
            glue,
            director,
            params,
            ctx: LayerContext::new(params.l)?,
        })
    }

    /// Expansion order; only the leading order is built.
    pub fn order(&self) -> usize {
        0
    }

    pub fn context(&self) -> &LayerContext {
        &self.ctx
    }

    /// Scalar order `q` and `∂_d q`, `∂_d^2 q` at a point.
    pub fn order_at(&self, x: &Vec3, t: f64) -> Result<[f64; 3]> {
        let d = self.geometry.d(x, t)?;
        Ok(glued_order(d, self.params.epsilon, &self.glue, &self.ctx))
    }

    pub fn q_at(&self, x: &Vec3, t: f64) -> Result<SymTraceless3> {
        let q = self.order_at(x, t)?[0];
        if q == 0.0 {
            return Ok(SymTraceless3::ZERO);
        }
        let (n, _) = self.director.eval(&self.geometry, x, t)?;
        Ok(SymTraceless3::uniaxial(&n) * q)
    }

    /// `∂_t Q` by the chain rule through `d(x, t)` and `n(x, t)`.
    pub fn dqdt_at(&self, x: &Vec3, t: f64) -> Result<SymTraceless3> {
        let [q, dq, _] = self.order_at(x, t)?;
        if q == 0.0 && dq == 0.0 {
            return Ok(SymTraceless3::ZERO);
        }
        let (n, dn) = self.director.eval(&self.geometry, x, t)?;
        let mut out = SymTraceless3::sym_outer(&n, &dn) * q;
        if dq != 0.0 {
            let dd = self.geometry.signed_distance(x, t)?.dt;
            out += SymTraceless3::uniaxial(&n) * (dq * dd);
        }
        Ok(out)
    }
}

/// Samples the approximate solution on a periodic grid at time `t`.
pub fn build_q0(sol: &ApproxSolution, grid: PeriodicGrid, t: f64) -> Result<QField> {
    let data = (0..grid.len())
        .into_par_iter()
        .map(|i| sol.q_at(&grid.position(i), t))
        .collect::<Result<Vec<_>>>()?;
    let field = QField {
        grid,
        data,
        params: sol.params,
        time: t,
    };
    field.validate()?;
    Ok(field)
}

/// `h0` and the tensor `g0` with `G0 = (L/2) s''(z) g0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correction {
    pub d: f64,
    pub h0: Vec3,
    pub g0: Mat3,
}

impl Correction {
    /// `G0` for a given `s''(z)`.
    pub fn big_g0(&self, l: f64, s2: f64) -> Mat3 {
        let k = 0.5 * l * s2;
        self.g0.map(|row| row.map(|v| k * v))
    }
}

const ON_INTERFACE: f64 = 1e-9;
const ANCHOR_TOL: f64 = 1e-8;

fn g0_tensor(n: &Vec3, h: &Vec3, d: f64) -> Mat3 {
    let nh = dot3(n, h);
    let hh = dot3(h, h);
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let sym = n[i] * h[j] + h[i] * n[j];
            let id = if i == j { 1.0 } else { 0.0 };
            g[i][j] = -2.0 / 3.0 * sym - 2.0 * n[i] * n[j] * nh + d * nh * sym
                - 2.0 / 3.0 * d * h[i] * h[j]
                + id * (8.0 / 9.0 * nh - 2.0 / 3.0 * d * nh * nh + 2.0 / 9.0 * d * hh);
        }
    }
    g
}

/// `h0 = (n - ∇d)/d` off the interface and `∂_ν(n - ∇d)` on it, with the
/// correction tensor built from it.
pub fn h0_and_g0(sol: &ApproxSolution, x: &Vec3, t: f64) -> Result<Correction> {
    let geom = &sol.geometry;
    let dist = geom.signed_distance(x, t)?;
    let (n, _) = sol.director.eval(geom, x, t)?;
    let h0: Vec3 = if dist.d.abs() > ON_INTERFACE {
        std::array::from_fn(|k| (n[k] - dist.grad[k]) / dist.d)
    } else {
        let gap = (0..3)
            .map(|k| (n[k] - dist.grad[k]).abs())
            .fold(0.0, f64::max);
        if gap > ANCHOR_TOL {
            return Err(Error::InvalidFrame(format!(
                "director differs from the normal by {gap:e} on the interface"
            )));
        }
        let tau = 1e-5;
        let at = |sign: f64| -> Result<Vec3> {
            let y: Vec3 = std::array::from_fn(|k| x[k] + sign * tau * dist.grad[k]);
            let g = geom.signed_distance(&y, t)?.grad;
            let (m, _) = sol.director.eval(geom, &y, t)?;
            Ok(std::array::from_fn(|k| m[k] - g[k]))
        };
        let (p, m) = (at(1.0)?, at(-1.0)?);
        let h: Vec3 = std::array::from_fn(|k| (p[k] - m[k]) / (2.0 * tau));
        if dot3(&h, &n).abs() > ANCHOR_TOL {
            return Err(Error::InvalidFrame(format!(
                "h0·n = {:e} on the interface",
                dot3(&h, &n)
            )));
        }
        h
    };
    Ok(Correction {
        d: dist.d,
        h0,
        g0: g0_tensor(&n, &h0, dist.d),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layer::s_profile;
    use crate::tensor::{basis_from_frame, Frame};

    fn params() -> ModelParams {
        ModelParams::new(-0.5, 0.02).unwrap()
    }

    #[test]
    fn interface_value_and_far_field() {
        let geom = Geometry::radial([0.5, 0.5, 0.0], 0.3, 2).unwrap();
        let glue = GlueConfig::new(0.2).unwrap();
        let sol = ApproxSolution::new(geom, glue, DirectorField::Normal, params()).unwrap();
        let on = sol.order_at(&[0.8, 0.5, 0.0], 0.0).unwrap()[0];
        assert!((on - 0.5).abs() < 1e-15);
        let gamma = sol.context().gamma;
        // d = -delta: outer value 0, bound C e^{-gamma delta/eps}
        let deep = sol.q_at(&[0.6, 0.5, 0.0], 0.0).unwrap().norm();
        assert!(deep <= (-gamma * 0.2 / 0.02).exp(), "{deep}");
        assert_eq!(
            sol.q_at(&[0.5, 0.5, 0.0], 0.0).unwrap(),
            SymTraceless3::ZERO
        );
        let far = sol.q_at(&[0.5, 1.05, 0.0], 0.0).unwrap();
        assert_eq!(far, SymTraceless3::uniaxial(&[0.0, 1.0, 0.0]));
        assert!(matches!(
            ApproxSolution::new(
                geom,
                GlueConfig::new(0.1).unwrap(),
                DirectorField::Normal,
                params()
            ),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn full_band_flat_layer_is_the_profile() {
        let geom = Geometry::flat([1.0, 0.0, 0.0], 0.25).unwrap();
        let sol = ApproxSolution::new(
            geom,
            GlueConfig::full_band(),
            DirectorField::Normal,
            params(),
        )
        .unwrap();
        let grid = PeriodicGrid::cube(1, 64, 1.0).unwrap();
        let f = build_q0(&sol, grid, 0.0).unwrap();
        let e0 = SymTraceless3::uniaxial(&[1.0, 0.0, 0.0]);
        for (i, q) in f.data.iter().enumerate() {
            let z = (grid.position(i)[0] - 0.25) / 0.02;
            assert_eq!(*q, e0 * s_profile(z, sol.context(), 0).unwrap());
        }
    }

    #[test]
    fn rigid_motion_commutes() {
        let glue = GlueConfig::new(0.2).unwrap();
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let a = ApproxSolution::new(
            Geometry::flat([1.0, 0.0, 0.0], 0.1).unwrap(),
            glue,
            DirectorField::Normal,
            params(),
        )
        .unwrap();
        let b = ApproxSolution::new(
            Geometry::flat([c, c, 0.0], 0.1).unwrap(),
            glue,
            DirectorField::Normal,
            params(),
        )
        .unwrap();
        let rot = [[c, -c, 0.0], [c, c, 0.0], [0.0, 0.0, 1.0]];
        for x in [[0.05, 0.3, 0.0], [0.2, -0.1, 0.4], [0.11, 0.0, 0.0]] {
            let y: Vec3 = std::array::from_fn(|i| dot3(&rot[i], &x));
            let qa = a.q_at(&x, 0.0).unwrap().rotate(&rot);
            let qb = b.q_at(&y, 0.0).unwrap();
            assert!((qa - qb).max_abs() < 1e-12);
        }
    }

    #[test]
    fn time_derivative_by_chain_rule() {
        let geom = Geometry::radial_mcf([0.0; 3], 0.3, 2, -0.5).unwrap();
        let dir = DirectorField::Escaped {
            width: 0.2,
            axis: [0.0, 0.0, 1.0],
        };
        let sol = ApproxSolution::new(geom, GlueConfig::new(0.2).unwrap(), dir, params()).unwrap();
        let h = 1e-6;
        for x in [[0.31, 0.02, 0.0], [0.2, 0.2, 0.0], [0.05, 0.4, 0.0]] {
            let fd =
                (sol.q_at(&x, 0.01 + h).unwrap() - sol.q_at(&x, 0.01 - h).unwrap()) * (0.5 / h);
            let an = sol.dqdt_at(&x, 0.01).unwrap();
            assert!((fd - an).max_abs() < 1e-5 * (1.0 + an.max_abs()), "{x:?}");
        }
    }

    #[test]
    fn anchored_fields_have_no_correction() {
        let flat = ApproxSolution::new(
            Geometry::flat([0.0, 1.0, 0.0], 0.0).unwrap(),
            GlueConfig::new(0.2).unwrap(),
            DirectorField::Constant([0.0, 1.0, 0.0]),
            params(),
        )
        .unwrap();
        let radial = ApproxSolution::new(
            Geometry::radial([0.0; 3], 0.3, 3).unwrap(),
            GlueConfig::new(0.2).unwrap(),
            DirectorField::Normal,
            params(),
        )
        .unwrap();
        for sol in [&flat, &radial] {
            for x in [
                [0.1, 0.3, 0.2],
                [0.0, 0.0, 0.3],
                [0.3, 0.0, 0.0],
                [0.0, 0.05, 0.0],
            ] {
                let c = h0_and_g0(sol, &x, 0.0).unwrap();
                assert!(c.h0.iter().all(|v| v.abs() < 1e-9), "{:?}", c.h0);
                assert!(c.g0.iter().flatten().all(|v| v.abs() < 1e-8));
            }
        }
    }

    #[test]
    fn manufactured_h0_is_recovered() {
        let geom = Geometry::radial([0.0; 3], 0.4, 2).unwrap();
        // tangential w, so w·∇d = 0
        let w = |x: &Vec3| {
            let th = x[1].atan2(x[0]);
            let a = 0.7 * (3.0 * th).cos();
            [-a * th.sin(), a * th.cos(), 0.0]
        };
        let n = move |x: &Vec3, _t: f64| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            let d = r - 0.4;
            let ww = w(x);
            [x[0] / r + d * ww[0], x[1] / r + d * ww[1], 0.0]
        };
        let sol = ApproxSolution::new(
            geom,
            GlueConfig::new(0.2).unwrap(),
            DirectorField::Custom(Arc::new(n)),
            params(),
        )
        .unwrap();
        for (r, th) in [(0.4, 0.3), (0.45, 1.0), (0.31, 2.5), (0.4, -2.0)] {
            let x = [r * f64::cos(th), r * f64::sin(th), 0.0];
            let c = h0_and_g0(&sol, &x, 0.0).unwrap();
            let e = w(&x);
            for k in 0..3 {
                assert!(
                    (c.h0[k] - e[k]).abs() < 1e-6,
                    "{r} {th}: {:?} vs {e:?}",
                    c.h0
                );
            }
        }
    }

    #[test]
    fn interface_values_of_g0() {
        let l = -0.7;
        let frame = Frame::from_director([0.6, 0.8, 0.0]).unwrap();
        let (n, lv, m) = (frame.n(), frame.l(), frame.m());
        let h: Vec3 = std::array::from_fn(|k| 0.3 * lv[k] - 1.1 * m[k]);
        let corr = Correction {
            d: 0.0,
            h0: h,
            g0: g0_tensor(&n, &h, 0.0),
        };
        let s2 = 0.37;
        let g = corr.big_g0(l, s2);
        let e = basis_from_frame(&frame);
        let contract = |a: &Mat3, b: &SymTraceless3| -> f64 {
            let bm = b.matrix();
            (0..3)
                .flat_map(|i| (0..3).map(move |j| (i, j)))
                .map(|(i, j)| a[i][j] * bm[i][j])
                .sum()
        };
        for i in 0..3 {
            for j in 0..3 {
                let expect = -l / 3.0 * s2 * (n[i] * h[j] + h[i] * n[j]);
                assert!((g[i][j] - expect).abs() < 1e-14);
            }
        }
        assert!(contract(&g, &e[0]).abs() < 1e-14);
        assert!(contract(&g, &e[3]).abs() < 1e-14);
        assert!(contract(&g, &e[4]).abs() < 1e-14);
        assert!((contract(&g, &e[1]) + 2.0 * l / 3.0 * s2 * dot3(&h, &lv)).abs() < 1e-14);
        assert!((contract(&g, &e[2]) + 2.0 * l / 3.0 * s2 * dot3(&h, &m)).abs() < 1e-14);
    }
}
