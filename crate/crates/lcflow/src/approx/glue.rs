use crate::error::{Error, Result};
use crate::layer::{s_profile, LayerContext};

/// Cut-off profile and gluing half-width.
///
/// `eta(y) = 1` for `|y| <= 1/2`, `0` for `|y| >= 1`, joined by a clamped
/// quintic smoothstep so that `eta` is `C^2`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GlueConfig {
    pub delta: f64,
}

impl GlueConfig {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::Config(format!(
                "gluing width delta = {delta} must be positive"
            )));
        }
        Ok(GlueConfig { delta })
    }

    /// `eta = 1` everywhere: the pure layer profile with no outer field.
    pub fn full_band() -> Self {
        GlueConfig {
            delta: f64::INFINITY,
        }
    }

    /// Rejects bands that do not contain the layer (`delta >= 8 eps`).
    pub fn check_resolves(&self, eps: f64) -> Result<()> {
        if self.delta < 8.0 * eps {
            return Err(Error::Config(format!(
                "gluing width delta = {} is below 8 eps = {}",
                self.delta,
                8.0 * eps
            )));
        }
        Ok(())
    }
}

pub fn cutoff(y: f64) -> f64 {
    let a = y.abs();
    if a <= 0.5 {
        1.0
    } else if a >= 1.0 {
        0.0
    } else {
        let t = 2.0 * a - 1.0;
        1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

/// `eta'(y)`.
pub fn cutoff_d1(y: f64) -> f64 {
    let a = y.abs();
    if a <= 0.5 || a >= 1.0 {
        return 0.0;
    }
    let t = 2.0 * a - 1.0;
    -2.0 * 30.0 * t * t * (1.0 - t) * (1.0 - t) * y.signum()
}

/// `eta''(y)`.
pub fn cutoff_d2(y: f64) -> f64 {
    let a = y.abs();
    if a <= 0.5 || a >= 1.0 {
        return 0.0;
    }
    let t = 2.0 * a - 1.0;
    -4.0 * 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t)
}

/// Scalar order of the glued leading-order field at signed distance `d`,
/// with derivatives in `d` up to second order.
pub fn glued_order(d: f64, eps: f64, glue: &GlueConfig, ctx: &LayerContext) -> [f64; 3] {
    let z = d / eps;
    let s = [
        s_profile(z, ctx, 0).unwrap(),
        s_profile(z, ctx, 1).unwrap() / eps,
        s_profile(z, ctx, 2).unwrap() / (eps * eps),
    ];
    let y = d / glue.delta;
    let e = [
        cutoff(y),
        cutoff_d1(y) / glue.delta,
        cutoff_d2(y) / (glue.delta * glue.delta),
    ];
    // outer field: 1 on the nematic side, 0 on the isotropic side
    let outer = if d > 0.0 { 1.0 } else { 0.0 };
    let diff = [s[0] - outer, s[1], s[2]];
    [
        outer + e[0] * diff[0],
        e[1] * diff[0] + e[0] * diff[1],
        e[2] * diff[0] + 2.0 * e[1] * diff[1] + e[0] * diff[2],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(0.0), 1.0);
        assert_eq!(cutoff(0.5), 1.0);
        assert_eq!(cutoff(-1.0), 0.0);
        assert!((cutoff(0.75) - 0.5).abs() < 1e-15);
        let h = 1e-5;
        for y in [-0.9, -0.6, 0.55, 0.7, 0.95] {
            let d1 = (cutoff(y + h) - cutoff(y - h)) / (2.0 * h);
            let d2 = (cutoff_d1(y + h) - cutoff_d1(y - h)) / (2.0 * h);
            assert!((d1 - cutoff_d1(y)).abs() < 1e-8, "{y}");
            assert!((d2 - cutoff_d2(y)).abs() < 1e-6, "{y}");
        }
        for i in 0..100 {
            let y = 0.5 + i as f64 / 200.0;
            assert!(cutoff(y + 0.005) <= cutoff(y));
        }
    }

    #[test]
    fn glued_order_matches_layer_inside_band() {
        let c = LayerContext::new(-0.5).unwrap();
        let g = GlueConfig::new(0.4).unwrap();
        assert_eq!(glued_order(0.0, 0.02, &g, &c)[0], 0.5);
        assert_eq!(glued_order(0.5, 0.02, &g, &c)[0], 1.0);
        assert_eq!(glued_order(-0.5, 0.02, &g, &c)[0], 0.0);
        assert!(g.check_resolves(0.06).is_err());
        let h = 1e-6;
        for d in [-0.35, -0.01, 0.003, 0.25] {
            let v = |x| glued_order(x, 0.02, &g, &c);
            let fd = (v(d + h)[0] - v(d - h)[0]) / (2.0 * h);
            assert!((fd - v(d)[1]).abs() < 1e-6 * (1.0 + fd.abs()), "{d}");
        }
    }
}
