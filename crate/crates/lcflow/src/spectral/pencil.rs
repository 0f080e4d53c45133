use crate::error::{Error, Result};

/// Symmetric tridiagonal pencil `K p = lambda M p` with diagonal `M > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pencil {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    pub mass: Vec<f64>,
}

impl Pencil {
    pub fn new(diag: Vec<f64>, off: Vec<f64>, mass: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || off.len() + 1 != n || mass.len() != n {
            return Err(Error::GridMismatch(format!(
                "pencil sizes diag {n}, off {}, mass {}",
                off.len(),
                mass.len()
            )));
        }
        if let Some(m) = mass.iter().find(|m| !(**m > 0.0)) {
            return Err(Error::Domain(format!("mass entry {m} is not positive")));
        }
        Ok(Pencil { diag, off, mass })
    }

    /// Standard symmetric tridiagonal matrix (`M = I`).
    pub fn standard(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        Pencil::new(diag, off, vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Infinity norm of `K`.
    pub fn norm(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut r = self.diag[i].abs();
                if i > 0 {
                    r += self.off[i - 1].abs();
                }
                if i + 1 < n {
                    r += self.off[i].abs();
                }
                r
            })
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * p[i];
                if i > 0 {
                    v += self.off[i - 1] * p[i - 1];
                }
                if i + 1 < n {
                    v += self.off[i] * p[i + 1];
                }
                v
            })
            .collect()
    }

    /// `p^T K p`.
    pub fn energy(&self, p: &[f64]) -> f64 {
        self.apply(p).iter().zip(p).map(|(a, b)| a * b).sum()
    }

    /// `p^T M p`.
    pub fn mass_norm_sq(&self, p: &[f64]) -> f64 {
        self.mass.iter().zip(p).map(|(m, v)| m * v * v).sum()
    }

    /// Number of eigenvalues strictly below `sigma` (Sylvester inertia of
    /// `K - sigma M` from its LDL^T pivots).
    pub fn count_below(&self, sigma: f64) -> usize {
        let n = self.len();
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut d = 0.0;
        for i in 0..n {
            let mut v = self.diag[i] - sigma * self.mass[i];
            if i > 0 {
                v -= self.off[i - 1] * self.off[i - 1] / d;
            }
            if v == 0.0 {
                v = -tiny;
            }
            if v < 0.0 {
                count += 1;
            }
            d = v;
        }
        count
    }

    /// Solves `(K - sigma M) x = b` by tridiagonal LU with partial pivoting.
    fn shifted_solve(&self, sigma: f64, b: &[f64]) -> Vec<f64> {
        let n = self.len();
        // rows stored as (sub, diag, sup, sup2)
        let mut dl: Vec<f64> = self.off.clone();
        let mut d: Vec<f64> = (0..n)
            .map(|i| self.diag[i] - sigma * self.mass[i])
            .collect();
        let mut du: Vec<f64> = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut x = b.to_vec();
        let mut swap = vec![false; n];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = f64::EPSILON * self.norm().max(1.0);
                }
                let f = dl[i] / d[i];
                dl[i] = f;
                d[i + 1] -= f * du[i];
            } else {
                swap[i] = true;
                let f = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = f;
                let t = du[i];
                du[i] = d[i + 1];
                d[i + 1] = t - f * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -f;
                }
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = f64::EPSILON * self.norm().max(1.0);
        }
        for i in 0..n.saturating_sub(1) {
            if swap[i] {
                x.swap(i, i + 1);
            }
            x[i + 1] -= dl[i] * x[i];
        }
        x[n - 1] /= d[n - 1];
        if n > 1 {
            x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
        }
        x
    }
}

/// Eigenpairs of a pencil, ascending, with `M`-orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    #[serde(skip)]
    pub vectors: Vec<Vec<f64>>,
    /// `|K p - lambda M p| / (|K| |p|)` per pair.
    pub residuals: Vec<f64>,
}

const RESIDUAL_TOL: f64 = 1e-8;

/// The `k` algebraically smallest eigenpairs by Sturm bisection and
/// inverse iteration.
pub fn smallest_eigenpairs(pencil: &Pencil, k: usize) -> Result<Eigenpairs> {
    let n = pencil.len();
    if k == 0 || k > n {
        return Err(Error::Domain(format!(
            "requested {k} eigenpairs of a size-{n} pencil"
        )));
    }
    let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
    let mut guard = 0;
    while pencil.count_below(lo) > 0 {
        lo *= 2.0;
        guard += 1;
        if guard > 2000 {
            return Err(Error::Convergence("no lower spectral bound".into()));
        }
    }
    while pencil.count_below(hi) < k {
        hi *= 2.0;
        guard += 1;
        if guard > 2000 {
            return Err(Error::Convergence("no upper spectral bound".into()));
        }
    }
    let values: Vec<f64> = (0..k)
        .map(|j| bisect(pencil, j, lo, hi))
        .collect::<Result<_>>()?;
    let kn = pencil.norm();
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut refined = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for (j, &lam) in values.iter().enumerate() {
        let (p, rq, res) = inverse_iteration(pencil, lam, &vectors, &values[..j], kn, j)?;
        vectors.push(p);
        refined.push(rq);
        residuals.push(res);
    }
    Ok(Eigenpairs {
        values: refined,
        vectors,
        residuals,
    })
}

/// The `j`-th eigenvalue (0-based) inside `[lo, hi]`.
fn bisect(pencil: &Pencil, j: usize, mut lo: f64, mut hi: f64) -> Result<f64> {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if pencil.count_below(mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn inverse_iteration(
    pencil: &Pencil,
    lam: f64,
    previous: &[Vec<f64>],
    prev_values: &[f64],
    kn: f64,
    seed: usize,
) -> Result<(Vec<f64>, f64, f64)> {
    let n = pencil.len();
    // deterministic, generic start vector
    let mut p: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * (0.7548776662 + 0.1 * seed as f64)).sin())
        .collect();
    let gap_tol = 1e-6 * kn.max(1.0);
    let close: Vec<usize> = prev_values
        .iter()
        .enumerate()
        .filter(|(_, v)| (lam - **v).abs() < gap_tol)
        .map(|(i, _)| i)
        .collect();
    let shift = lam + 8.0 * f64::EPSILON * lam.abs().max(f64::MIN_POSITIVE.sqrt());
    let mut rq = lam;
    let mut res = f64::INFINITY;
    for _ in 0..8 {
        let rhs: Vec<f64> = p.iter().zip(&pencil.mass).map(|(v, m)| v * m).collect();
        p = pencil.shifted_solve(shift, &rhs);
        for &c in &close {
            let q = &previous[c];
            let proj: f64 = (0..n).map(|i| pencil.mass[i] * q[i] * p[i]).sum();
            for i in 0..n {
                p[i] -= proj * q[i];
            }
        }
        let norm = pencil.mass_norm_sq(&p).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Convergence(format!(
                "inverse iteration broke down near lambda = {lam:e}"
            )));
        }
        for v in p.iter_mut() {
            *v /= norm;
        }
        rq = pencil.energy(&p);
        let kp = pencil.apply(&p);
        let r: f64 = (0..n)
            .map(|i| (kp[i] - rq * pencil.mass[i] * p[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        let pn = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        res = r / (kn * pn);
        if res < 1e-2 * RESIDUAL_TOL {
            break;
        }
    }
    if res > RESIDUAL_TOL {
        return Err(Error::Convergence(format!(
            "eigenpair near {lam:e} has residual {res:.3e}"
        )));
    }
    // fix the sign so that the largest entry is positive
    let imax = (0..n)
        .max_by(|&a, &b| p[a].abs().partial_cmp(&p[b].abs()).unwrap())
        .unwrap();
    if p[imax] < 0.0 {
        for v in p.iter_mut() {
            *v = -*v;
        }
    }
    Ok((p, rq, res))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let p = Pencil::standard(vec![1.0, 1.0], vec![0.0]).unwrap();
        let e = smallest_eigenpairs(&p, 2).unwrap();
        assert_eq!(e.values.len(), 2);
        for v in &e.values {
            assert!((v - 1.0).abs() < 1e-15);
        }
        let d: f64 = (0..2).map(|i| e.vectors[0][i] * e.vectors[1][i]).sum();
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn discrete_laplacian_closed_form() {
        // Dirichlet second difference: 2 - 2cos(k pi/(n+1))
        let n = 50;
        let p = Pencil::standard(vec![2.0; n], vec![-1.0; n - 1]).unwrap();
        let e = smallest_eigenpairs(&p, 4).unwrap();
        for (k, v) in e.values.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13, "{k}: {v} vs {exact}");
            assert!(e.residuals[k] < 1e-12);
        }
    }

    #[test]
    fn generalized_matches_scaled_standard() {
        let n = 40;
        let mass: Vec<f64> = (0..n).map(|i| 1.0 + 0.3 * (i as f64).sin().abs()).collect();
        let diag: Vec<f64> = (0..n).map(|i| 2.0 + (i as f64 * 0.1).cos()).collect();
        let off = vec![-1.0; n - 1];
        let gen = smallest_eigenpairs(
            &Pencil::new(diag.clone(), off.clone(), mass.clone()).unwrap(),
            3,
        )
        .unwrap();
        let sd: Vec<f64> = (0..n).map(|i| diag[i] / mass[i]).collect();
        let so: Vec<f64> = (0..n - 1)
            .map(|i| off[i] / (mass[i] * mass[i + 1]).sqrt())
            .collect();
        let std = smallest_eigenpairs(&Pencil::standard(sd, so).unwrap(), 3).unwrap();
        for k in 0..3 {
            assert!((gen.values[k] - std.values[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn pivoting_solve() {
        let p = Pencil::standard(vec![0.0, 0.0, 0.0], vec![1.0, 1.0]).unwrap();
        // [[0,1,0],[1,0,1],[0,1,0]] is singular; shift by -1
        let x = p.shifted_solve(-1.0, &[1.0, 2.0, 3.0]);
        let y: Vec<f64> = p.apply(&x).iter().zip(&x).map(|(a, b)| a + b).collect();
        for (a, b) in y.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
