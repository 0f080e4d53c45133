//! Property suites for the tensor algebra and the div-curl identity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::field::{divcurl_check, random_band_limited, PeriodicGrid, Spectral};
use crate::layer::{potential, Potential};
use crate::tensor::{
    basis_from_frame, bulk_force, bulk_potential, decompose, hessian_apply, reconstruct,
    BasisCoeffs, Frame, Mat3, ModelParams, SymTraceless3, BASIS_NORM_SQ,
};

/// Outcome of one property suite.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    pub max_defect: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, cases: usize, max_defect: f64, tolerance: f64) -> Self {
        Check {
            name: name.to_string(),
            cases,
            max_defect,
            tolerance,
            passed: max_defect.is_finite() && max_defect < tolerance,
        }
    }
}

/// Sizes of the suites.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CheckSizes {
    pub seed: u64,
    pub frames: usize,
    pub pairs: usize,
    pub fields: usize,
    pub field_nodes: usize,
}

impl Default for CheckSizes {
    fn default() -> Self {
        CheckSizes {
            seed: 1,
            frames: 20,
            pairs: 100,
            fields: 20,
            field_nodes: 64,
        }
    }
}

/// Uniformly distributed rotation from a random unit quaternion.
pub fn random_rotation(rng: &mut impl Rng) -> Mat3 {
    let q = loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 1e-4 && n2 <= 1.0 {
            let n = n2.sqrt();
            break v.map(|x| x / n);
        }
    };
    let [w, x, y, z] = q;
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

pub fn random_frame(rng: &mut impl Rng) -> Result<Frame> {
    Frame::standard().rotate(&random_rotation(rng))
}

fn random_tensor(rng: &mut impl Rng, scale: f64) -> SymTraceless3 {
    SymTraceless3(std::array::from_fn(|_| rng.gen_range(-scale..scale)))
}

fn params() -> ModelParams {
    ModelParams::new(-0.5, 1.0).expect("fixed parameters are valid")
}

/// Coefficients of the Hessian at `s E^0` on the frame basis.
pub fn hessian_coefficients(s: f64) -> [f64; 5] {
    let th = potential(Potential::Theta, s);
    let ka = potential(Potential::Kappa, s);
    let io = potential(Potential::Iota, s);
    [-th, -ka, -ka, -io, -io]
}

pub const HESSIAN_S: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// The Hessian at `s E^0(frame)` maps each `E^i` to a multiple of itself.
pub fn hessian_diagonal(frames: usize, seed: u64) -> Result<Check> {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..frames {
        let f = random_frame(&mut rng)?;
        let e = basis_from_frame(&f);
        for s in HESSIAN_S {
            let coef = hessian_coefficients(s);
            for i in 0..5 {
                let got = hessian_apply(&(e[0] * s), &e[i], &p);
                worst = worst.max((got - e[i] * coef[i]).max_abs());
            }
        }
    }
    Ok(Check::new(
        "hessian_diagonal",
        frames * HESSIAN_S.len(),
        worst,
        1e-12,
    ))
}

/// Hessian against a centered difference of the bulk force.
pub fn hessian_vs_jacobian(pairs: usize, seed: u64) -> Check {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let a = random_tensor(&mut rng, 1.0);
        let q = random_tensor(&mut rng, 1.0);
        let fd = (bulk_force(&(a + q * h), &p) - bulk_force(&(a - q * h), &p)) * (0.5 / h);
        worst = worst.max((hessian_apply(&a, &q, &p) - fd).max_abs());
    }
    Check::new("hessian_vs_jacobian", pairs, worst, 1e-6)
}

/// Force is minus the gradient of the potential.
pub fn force_is_gradient(pairs: usize, seed: u64) -> Check {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let a = random_tensor(&mut rng, 1.0);
        let q = random_tensor(&mut rng, 1.0);
        let fd = (bulk_potential(&(a + q * h), &p) - bulk_potential(&(a - q * h), &p)) / (2.0 * h);
        worst = worst.max((fd + bulk_force(&a, &p).dot(&q)).abs());
    }
    Check::new("force_is_gradient", pairs, worst, 1e-6)
}

/// Potential is rotation invariant and the force rotation covariant.
pub fn rotation_covariance(pairs: usize, seed: u64) -> Check {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let r = random_rotation(&mut rng);
        let q = random_tensor(&mut rng, 1.0);
        let qr = q.rotate(&r);
        worst = worst.max((bulk_potential(&qr, &p) - bulk_potential(&q, &p)).abs());
        worst = worst.max((bulk_force(&qr, &p) - bulk_force(&q, &p).rotate(&r)).max_abs());
    }
    Check::new("rotation_covariance", pairs, worst, 1e-12)
}

/// `E^i` are orthogonal with the stated norms and decomposition inverts
/// reconstruction.
pub fn basis_round_trip(frames: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..frames {
        let f = random_frame(&mut rng)?;
        let e = basis_from_frame(&f);
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { BASIS_NORM_SQ[i] } else { 0.0 };
                worst = worst.max((e[i].dot(&e[j]) - want).abs());
            }
        }
        let q = random_tensor(&mut rng, 1.0);
        worst = worst.max((reconstruct(&decompose(&q, &f), &f) - q).max_abs());
        let c = BasisCoeffs(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
        let back = decompose(&reconstruct(&c, &f), &f);
        worst = worst.max(
            (0..5)
                .map(|i| (back.0[i] - c.0[i]).abs())
                .fold(0.0, f64::max),
        );
    }
    Ok(Check::new("basis_round_trip", frames, worst, 1e-12))
}

/// Pointwise and integrated div-curl defects on random periodic fields.
pub fn divcurl(fields: usize, nodes: usize, seed: u64) -> Result<[Check; 2]> {
    let grid = PeriodicGrid::cube(3, nodes, 1.0)?;
    let sp = Spectral::new(&grid);
    let (mut pw, mut int): (f64, f64) = (0.0, 0.0);
    for k in 0..fields {
        let f = random_band_limited(grid, params(), seed.wrapping_add(k as u64));
        let r = divcurl_check(&f, &sp);
        pw = pw.max(r.pointwise);
        int = int.max(r.integrated);
    }
    Ok([
        Check::new("divcurl_pointwise", fields, pw, 1e-10),
        Check::new("divcurl_integrated", fields, int, 1e-10),
    ])
}

/// All suites.
pub fn identity_checks(sizes: &CheckSizes) -> Result<Vec<Check>> {
    let s = sizes.seed;
    let mut out = vec![
        basis_round_trip(sizes.frames, s)?,
        hessian_diagonal(sizes.frames, s)?,
        hessian_vs_jacobian(sizes.pairs, s),
        force_is_gradient(sizes.pairs, s),
        rotation_covariance(sizes.pairs, s),
    ];
    out.extend(divcurl(sizes.fields, sizes.field_nodes, s)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotations_are_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let r = random_rotation(&mut rng);
            for i in 0..3 {
                for j in 0..3 {
                    let d: f64 = (0..3).map(|k| r[i][k] * r[j][k]).sum();
                    assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn well_coefficients() {
        assert_eq!(hessian_coefficients(1.0), [-1.0, 0.0, 0.0, -9.0, -9.0]);
        assert_eq!(hessian_coefficients(0.0), [-1.0; 5]);
    }

    #[test]
    fn small_suites_pass() {
        let sizes = CheckSizes {
            seed: 7,
            frames: 3,
            pairs: 10,
            fields: 1,
            field_nodes: 16,
        };
        for c in identity_checks(&sizes).unwrap() {
            assert!(c.passed, "{c:?}");
        }
    }
}
