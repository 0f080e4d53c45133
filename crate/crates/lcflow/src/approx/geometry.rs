use crate::error::{Error, Result};
use crate::tensor::{dot3, normalize3, Vec3};

/// Interface geometry with its signed distance `d` (positive on the
/// nematic side) and prescribed motion.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum Geometry {
    /// Plane `normal·x = offset`, nematic where `d = normal·x - offset > 0`.
    Flat { normal: Vec3, offset: f64 },
    /// Nematic slab `|normal·x - center| < half_width`, repeated with
    /// `period` along the normal.
    Slab {
        normal: Vec3,
        center: f64,
        half_width: f64,
        period: f64,
    },
    /// Isotropic ball of radius `R(t)` in the first `dim` coordinates,
    /// `R(t)^2 = r0^2 - 2 speed (dim - 1) t`.
    Radial {
        center: Vec3,
        r0: f64,
        dim: usize,
        speed: f64,
    },
}

/// Signed distance with its derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distance {
    pub d: f64,
    pub grad: Vec3,
    pub lap: f64,
    /// `∂_t d`.
    pub dt: f64,
}

fn unit(v: Vec3) -> Result<Vec3> {
    normalize3(&v).ok_or_else(|| Error::InvalidParams(format!("normal {v:?} is not a direction")))
}

impl Geometry {
    pub fn flat(normal: Vec3, offset: f64) -> Result<Self> {
        Ok(Geometry::Flat {
            normal: unit(normal)?,
            offset,
        })
    }

    pub fn slab(normal: Vec3, center: f64, half_width: f64, period: f64) -> Result<Self> {
        if !(half_width > 0.0 && 2.0 * half_width < period) {
            return Err(Error::InvalidParams(format!(
                "slab half-width {half_width} must lie in (0, period/2 = {})",
                period / 2.0
            )));
        }
        Ok(Geometry::Slab {
            normal: unit(normal)?,
            center,
            half_width,
            period,
        })
    }

    /// Static sphere (or circle, or pair of points for `dim = 1`).
    pub fn radial(center: Vec3, r0: f64, dim: usize) -> Result<Self> {
        Geometry::radial_moving(center, r0, dim, 0.0)
    }

    /// Sphere shrinking by mean curvature flow with speed `1 + 2L/3`.
    pub fn radial_mcf(center: Vec3, r0: f64, dim: usize, l: f64) -> Result<Self> {
        Geometry::radial_moving(center, r0, dim, 1.0 + 2.0 * l / 3.0)
    }

    fn radial_moving(center: Vec3, r0: f64, dim: usize, speed: f64) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidParams(format!(
                "radial geometry needs dim 2 or 3, got {dim}"
            )));
        }
        if !(r0 > 0.0) || !(speed >= 0.0) {
            return Err(Error::InvalidParams(format!("radius {r0}, speed {speed}")));
        }
        Ok(Geometry::Radial {
            center,
            r0,
            dim,
            speed,
        })
    }

    /// `R(t)` for radial geometries.
    pub fn radius(&self, t: f64) -> Result<f64> {
        match *self {
            Geometry::Radial { r0, dim, speed, .. } => {
                let r2 = r0 * r0 - 2.0 * speed * (dim as f64 - 1.0) * t;
                if r2 <= 0.0 {
                    return Err(Error::Domain(format!("the sphere has vanished by t = {t}")));
                }
                Ok(r2.sqrt())
            }
            _ => Err(Error::Domain("only radial geometries have a radius".into())),
        }
    }

    /// Predicted `R(t)^2` (may be negative after extinction).
    pub fn radius_sq(&self, t: f64) -> f64 {
        match *self {
            Geometry::Radial { r0, dim, speed, .. } => {
                r0 * r0 - 2.0 * speed * (dim as f64 - 1.0) * t
            }
            _ => f64::NAN,
        }
    }

    fn radial_offset(center: &Vec3, dim: usize, x: &Vec3) -> (Vec3, f64) {
        let mut v = [0.0; 3];
        for a in 0..dim {
            v[a] = x[a] - center[a];
        }
        let rho = dot3(&v, &v).sqrt();
        (v, rho)
    }

    /// `d(x, t)` alone; defined everywhere, including the radial center.
    pub fn d(&self, x: &Vec3, t: f64) -> Result<f64> {
        Ok(match self {
            Geometry::Flat { normal, offset } => dot3(normal, x) - offset,
            Geometry::Slab {
                normal,
                center,
                half_width,
                period,
            } => {
                let u = dot3(normal, x) - center;
                half_width - (u - period * (u / period).round()).abs()
            }
            Geometry::Radial { center, dim, .. } => {
                Geometry::radial_offset(center, *dim, x).1 - self.radius(t)?
            }
        })
    }

    /// `d`, `∇d`, `Δd` and `∂_t d`. The radial center is excluded.
    pub fn signed_distance(&self, x: &Vec3, t: f64) -> Result<Distance> {
        match self {
            Geometry::Flat { normal, .. } => Ok(Distance {
                d: self.d(x, t)?,
                grad: *normal,
                lap: 0.0,
                dt: 0.0,
            }),
            Geometry::Slab {
                normal,
                center,
                period,
                ..
            } => {
                let u = dot3(normal, x) - center;
                let u = u - period * (u / period).round();
                // on the mid-plane either sign of the normal will do
                let s = if u > 0.0 { -1.0 } else { 1.0 };
                Ok(Distance {
                    d: self.d(x, t)?,
                    grad: [s * normal[0], s * normal[1], s * normal[2]],
                    lap: 0.0,
                    dt: 0.0,
                })
            }
            Geometry::Radial {
                center, dim, speed, ..
            } => {
                let (v, rho) = Geometry::radial_offset(center, *dim, x);
                let r = self.radius(t)?;
                if rho <= 1e-12 * r {
                    return Err(Error::Domain(format!("x = {x:?} is at the center")));
                }
                let k = *dim as f64 - 1.0;
                Ok(Distance {
                    d: rho - r,
                    grad: [v[0] / rho, v[1] / rho, v[2] / rho],
                    lap: k / rho,
                    dt: speed * k / r,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_and_slab() {
        let g = Geometry::flat([2.0, 0.0, 0.0], 0.3).unwrap();
        let d = g.signed_distance(&[0.5, 7.0, 1.0], 3.0).unwrap();
        assert!((d.d - 0.2).abs() < 1e-15);
        assert_eq!((d.lap, d.dt), (0.0, 0.0));
        let s = Geometry::slab([1.0, 0.0, 0.0], 1.0, 0.5, 2.0).unwrap();
        assert!((s.d(&[0.5, 0.0, 0.0], 0.0).unwrap()).abs() < 1e-15);
        assert!((s.d(&[0.0, 0.0, 0.0], 0.0).unwrap() + 0.5).abs() < 1e-15);
        assert!((s.d(&[1.9, 0.0, 0.0], 0.0).unwrap() + 0.4).abs() < 1e-15);
        assert_eq!(
            s.signed_distance(&[1.6, 0.0, 0.0], 0.0).unwrap().grad,
            [-1.0, 0.0, 0.0]
        );
        assert!(Geometry::slab([1.0, 0.0, 0.0], 1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn radial_motion() {
        let g = Geometry::radial_mcf([0.0; 3], 0.3, 2, -0.5).unwrap();
        assert!((g.radius_sq(0.01) - (0.09 - 0.04 / 3.0)).abs() < 1e-15);
        assert!((g.radius_sq(0.01) - 0.0767).abs() < 1e-4);
        let x = [0.1, 0.2, 5.0];
        let d = g.signed_distance(&x, 0.01).unwrap();
        let rho = 0.05f64.sqrt();
        assert!((d.lap - 1.0 / rho).abs() < 1e-12);
        assert!((d.d - (rho - (0.09f64 - 0.04 / 3.0).sqrt())).abs() < 1e-15);
        // ∂_t d against a centered difference of d
        let h = 1e-6;
        let fd = (g.d(&x, 0.01 + h).unwrap() - g.d(&x, 0.01 - h).unwrap()) / (2.0 * h);
        assert!((fd - d.dt).abs() < 1e-6);
        assert!(matches!(
            g.signed_distance(&[0.0, 0.0, 1.0], 0.0),
            Err(Error::Domain(_))
        ));
        assert!(g.radius(0.1).is_err());
    }
}
