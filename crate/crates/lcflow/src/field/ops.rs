use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{PeriodicGrid, QField, Spectral};
use crate::error::{Error, Result};
use crate::tensor::{bulk_potential, Mat3, ModelParams, SymTraceless3};

type CMat = [[Complex64; 3]; 3];

fn to_cmat(c: &[Complex64; 5]) -> CMat {
    let zz = -(c[0] + c[1]);
    [[c[0], c[2], c[3]], [c[2], c[1], c[4]], [c[3], c[4], zz]]
}

fn from_cmat(m: &CMat) -> [Complex64; 5] {
    [m[0][0], m[1][1], m[0][1], m[0][2], m[1][2]]
}

/// Splits a (complex) symmetric traceless matrix into its parts relative to
/// the direction `khat`: the uniaxial part along `khat`, the shear part
/// `khat w + w khat` and the transverse remainder.
fn channel_split(m: &CMat, khat: &[f64; 3]) -> [CMat; 3] {
    let zero = Complex64::new(0.0, 0.0);
    let mut v = [zero; 3];
    for i in 0..3 {
        for j in 0..3 {
            v[i] += m[i][j] * khat[j];
        }
    }
    let a: Complex64 = (0..3).map(|i| v[i] * khat[i]).sum();
    let w: [Complex64; 3] = std::array::from_fn(|i| v[i] - a * khat[i]);
    let mut p0 = [[zero; 3]; 3];
    let mut p1 = [[zero; 3]; 3];
    let mut p2 = [[zero; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let id = if i == j { 1.0 } else { 0.0 };
            p0[i][j] = a * 1.5 * (khat[i] * khat[j] - id / 3.0);
            p1[i][j] = w[j] * khat[i] + w[i] * khat[j];
            p2[i][j] = m[i][j] - p0[i][j] - p1[i][j];
        }
    }
    [p0, p1, p2]
}

/// Eigenvalues of `M ↦ khat (M khat) + (M khat) khat - (2/3)(khat.M khat) I`
/// on the three channels.
const CHANNEL_T: [f64; 3] = [4.0 / 3.0, 1.0, 0.0];

/// Applies `M ↦ g(|k|^2, t) M` channel by channel to the Fourier
/// coefficients of a field.
pub(crate) fn apply_symbol(
    sp: &Spectral,
    hats: &mut [Vec<Complex64>; 5],
    g: impl Fn(f64, f64) -> f64 + Sync,
) {
    let n = sp.grid().len();
    let out: Vec<[Complex64; 5]> = (0..n)
        .into_par_iter()
        .map(|i| {
            let k = sp.wavevector(i);
            let rho = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let c: [Complex64; 5] = std::array::from_fn(|q| hats[q][i]);
            if rho == 0.0 {
                let f = g(0.0, 0.0);
                return c.map(|x| x * f);
            }
            let r = rho.sqrt();
            let khat = [k[0] / r, k[1] / r, k[2] / r];
            let parts = channel_split(&to_cmat(&c), &khat);
            let zero = Complex64::new(0.0, 0.0);
            let mut m = [[zero; 3]; 3];
            for (p, t) in parts.iter().zip(CHANNEL_T) {
                let f = g(rho, t);
                for a in 0..3 {
                    for b in 0..3 {
                        m[a][b] += p[a][b] * f;
                    }
                }
            }
            from_cmat(&m)
        })
        .collect();
    for (i, c) in out.into_iter().enumerate() {
        for q in 0..5 {
            hats[q][i] = c[q];
        }
    }
}

/// Channel parts of a Fourier coefficient as 5-component tensors, with the
/// channel eigenvalues of the divergence term.
#[cfg(test)]
pub(crate) fn channel_parts(c: &[Complex64; 5], k: &[f64; 3]) -> ([[Complex64; 5]; 3], [f64; 3]) {
    let rho = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    let zero = [Complex64::new(0.0, 0.0); 5];
    if rho == 0.0 {
        return ([zero, zero, *c], CHANNEL_T);
    }
    let r = rho.sqrt();
    let khat = [k[0] / r, k[1] / r, k[2] / r];
    let parts = channel_split(&to_cmat(c), &khat);
    (parts.map(|p| from_cmat(&p)), CHANNEL_T)
}

/// One semi-implicit update of a Fourier coefficient: `u = q + dt f` divided
/// channel by channel by `1 + dt |k|^2 (1 + (L/2) t)`. Also returns the
/// elastic density `|k|^2 |q|^2 + L |q k|^2` of `q`.
pub(crate) fn semi_implicit_update(
    q: &[Complex64; 5],
    f: &[Complex64; 5],
    k: &[f64; 3],
    dt: f64,
    l: f64,
) -> ([Complex64; 5], f64) {
    let rho = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    let u: [Complex64; 5] = std::array::from_fn(|c| q[c] + f[c] * dt);
    if rho == 0.0 {
        return (u, 0.0);
    }
    let mq = to_cmat(q);
    let mut qk = [Complex64::new(0.0, 0.0); 3];
    for i in 0..3 {
        qk[i] = mq[i][0] * k[0] + mq[i][1] * k[1] + mq[i][2] * k[2];
    }
    let el = rho * frob_sq(q) + l * qk.iter().map(|z| z.norm_sqr()).sum::<f64>();

    let r = rho.sqrt();
    let kh = [k[0] / r, k[1] / r, k[2] / r];
    let mu = to_cmat(&u);
    let mut v = [Complex64::new(0.0, 0.0); 3];
    for i in 0..3 {
        v[i] = mu[i][0] * kh[0] + mu[i][1] * kh[1] + mu[i][2] * kh[2];
    }
    let a = v[0] * kh[0] + v[1] * kh[1] + v[2] * kh[2];
    let w: [Complex64; 3] = std::array::from_fn(|i| v[i] - a * kh[i]);
    let inv = CHANNEL_T.map(|t| 1.0 / (1.0 + dt * rho * (1.0 + 0.5 * l * t)));
    let (c0, c1) = (inv[0] - inv[2], inv[1] - inv[2]);
    let p0 = |i: usize, j: usize| {
        let id = if i == j { 1.0 / 3.0 } else { 0.0 };
        a * (1.5 * (kh[i] * kh[j] - id))
    };
    let p1 = |i: usize, j: usize| w[j] * kh[i] + w[i] * kh[j];
    const IJ: [(usize, usize); 5] = [(0, 0), (1, 1), (0, 1), (0, 2), (1, 2)];
    let out = std::array::from_fn(|c| {
        let (i, j) = IJ[c];
        u[c] * inv[2] + p0(i, j) * c0 + p1(i, j) * c1
    });
    (out, el)
}

/// Frobenius norm squared of the full matrix of a 5-component tensor.
pub(crate) fn frob_sq(c: &[Complex64; 5]) -> f64 {
    to_cmat(c).iter().flatten().map(|z| z.norm_sqr()).sum()
}

pub(crate) fn forward_all(sp: &Spectral, comps: &[Vec<f64>; 5]) -> [Vec<Complex64>; 5] {
    let v: Vec<Vec<Complex64>> = comps.par_iter().map(|c| sp.forward(c)).collect();
    let mut it = v.into_iter();
    std::array::from_fn(|_| it.next().unwrap())
}

pub(crate) fn inverse_all(sp: &Spectral, hats: [Vec<Complex64>; 5]) -> [Vec<f64>; 5] {
    let v: Vec<Vec<f64>> = hats.into_par_iter().map(|h| sp.inverse(h)).collect();
    let mut it = v.into_iter();
    std::array::from_fn(|_| it.next().unwrap())
}

/// `ΔQ + (L/2)(∂_ik Q_kj + ∂_jk Q_ki - (2/3) δ_ij ∂_kl Q_kl)` by its Fourier symbol.
pub fn elastic_apply(field: &QField, sp: &Spectral) -> QField {
    let l = field.params.l;
    let mut hats = forward_all(sp, &field.components());
    apply_symbol(sp, &mut hats, |rho, t| -rho * (1.0 + 0.5 * l * t));
    field.with_components(&inverse_all(sp, hats))
}

fn fd4_first(u: &[f64], g: &PeriodicGrid, axis: usize) -> Vec<f64> {
    shifted_stencil(
        u,
        g,
        axis,
        &[(1, 8.0), (2, -1.0), (-1, -8.0), (-2, 1.0)],
        1.0 / (12.0 * g.h(axis)),
    )
}

fn fd4_second(u: &[f64], g: &PeriodicGrid, axis: usize) -> Vec<f64> {
    let h = g.h(axis);
    let mut out = shifted_stencil(
        u,
        g,
        axis,
        &[(1, 16.0), (2, -1.0), (-1, 16.0), (-2, -1.0)],
        1.0 / (12.0 * h * h),
    );
    for (o, x) in out.iter_mut().zip(u) {
        *o -= 30.0 / (12.0 * h * h) * x;
    }
    out
}

fn shifted_stencil(
    u: &[f64],
    g: &PeriodicGrid,
    axis: usize,
    taps: &[(isize, f64)],
    scale: f64,
) -> Vec<f64> {
    let n = g.n[axis] as isize;
    (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let m = g.multi_index(idx);
            taps.iter()
                .map(|&(s, w)| {
                    let mut mm = m;
                    mm[axis] = (((m[axis] as isize + s) % n + n) % n) as usize;
                    w * u[g.index(mm)]
                })
                .sum::<f64>()
                * scale
        })
        .collect()
}

/// The same operator by fourth-order centered differences.
pub fn elastic_apply_fd4(field: &QField) -> QField {
    let g = &field.grid;
    let l = field.params.l;
    let comps = field.components();
    let dim = g.dim;
    // second derivatives ∂_a∂_b of every component
    let mut hess: Vec<Vec<Option<[Vec<f64>; 5]>>> = vec![vec![None; 3]; 3];
    for a in 0..dim {
        for b in a..dim {
            let d: [Vec<f64>; 5] = std::array::from_fn(|c| {
                if a == b {
                    fd4_second(&comps[c], g, a)
                } else {
                    fd4_first(&fd4_first(&comps[c], g, a), g, b)
                }
            });
            hess[a][b] = Some(d);
        }
    }
    let get = |a: usize, b: usize| hess[a.min(b)][a.max(b)].as_ref();
    let data = (0..g.len())
        .map(|i| {
            let dq = |a: usize, b: usize| -> Mat3 {
                match get(a, b) {
                    Some(d) => SymTraceless3(std::array::from_fn(|c| d[c][i])).matrix(),
                    None => [[0.0; 3]; 3],
                }
            };
            let mut lap = [[0.0; 3]; 3];
            let mut w = [[0.0; 3]; 3];
            for a in 0..3 {
                let m = dq(a, a);
                for p in 0..3 {
                    for q in 0..3 {
                        lap[p][q] += m[p][q];
                    }
                }
            }
            // w_ij = Σ_k ∂_i∂_k Q_kj
            for i in 0..3 {
                for k in 0..3 {
                    let m = dq(i, k);
                    for j in 0..3 {
                        w[i][j] += m[k][j];
                    }
                }
            }
            let mut out = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    out[i][j] = lap[i][j] + 0.5 * l * (w[i][j] + w[j][i]);
                }
            }
            SymTraceless3::from_matrix(&out)
        })
        .collect();
    QField {
        data,
        ..field.clone()
    }
}

/// Spectral first derivatives: `grad[a][i] = ∂_a Q` at node `i`.
pub fn gradient(field: &QField, sp: &Spectral) -> [Vec<SymTraceless3>; 3] {
    let hats = forward_all(sp, &field.components());
    std::array::from_fn(|a| {
        if a >= field.grid.dim {
            return vec![SymTraceless3::ZERO; field.grid.len()];
        }
        let d: Vec<Vec<f64>> = hats.par_iter().map(|h| sp.derivative(h, a)).collect();
        (0..field.grid.len())
            .map(|i| SymTraceless3(std::array::from_fn(|c| d[c][i])))
            .collect()
    })
}

fn divergence_at(grad: &[Vec<SymTraceless3>; 3], i: usize) -> [f64; 3] {
    std::array::from_fn(|j| (0..3).map(|a| grad[a][i].get(a, j)).sum())
}

/// Energy with its bulk and elastic parts.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EnergyParts {
    pub bulk: f64,
    pub elastic: f64,
    pub total: f64,
}

/// `eps^-2 ∫F(Q) + (1/2)∫(|∇Q|^2 + L|∇·Q|^2)` with spectral derivatives.
pub fn energy_parts(field: &QField, sp: &Spectral) -> EnergyParts {
    let grad = gradient(field, sp);
    let p = &field.params;
    let dv = field.grid.cell_volume();
    let mut bulk = 0.0;
    let mut el = 0.0;
    for i in 0..field.grid.len() {
        bulk += bulk_potential(&field.data[i], p);
        let g2: f64 = (0..3).map(|a| grad[a][i].norm_sq()).sum();
        let d = divergence_at(&grad, i);
        el += g2 + p.l * (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    }
    let bulk = bulk * dv / (p.epsilon * p.epsilon);
    let elastic = 0.5 * el * dv;
    EnergyParts {
        bulk,
        elastic,
        total: bulk + elastic,
    }
}

pub fn energy(field: &QField, sp: &Spectral) -> f64 {
    energy_parts(field, sp).total
}

fn levi(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

fn t_at(grad: &[Vec<SymTraceless3>; 3], idx: usize) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut v = 0.0;
            for k in 0..3 {
                for l in 0..3 {
                    let e1 = levi(i, k, l);
                    if e1 != 0.0 {
                        v += e1 * grad[k][idx].get(l, j);
                    }
                    let e2 = levi(j, k, l);
                    if e2 != 0.0 {
                        v += e2 * grad[k][idx].get(l, i);
                    }
                }
            }
            t[i][j] = v;
        }
    }
    t
}

/// `T_ij = ε_ikl ∂_k Q_lj + ε_jkl ∂_k Q_li` at every node.
pub fn t_operator(field: &QField, sp: &Spectral) -> Vec<Mat3> {
    let grad = gradient(field, sp);
    (0..field.grid.len()).map(|i| t_at(&grad, i)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DivCurlReport {
    /// Largest pointwise defect of the gradient decomposition.
    pub pointwise: f64,
    /// `|∫|∇·Q|^2 - (2/3)∫|∇Q|^2 + (1/6)∫|T(Q)|^2|`.
    pub integrated: f64,
    /// `∫|∇Q|^2`, for scale.
    pub grad_norm_sq: f64,
}

/// Checks `|∇Q|^2 = (3/2)|∇·Q|^2 + (1/4)|T|^2 + (∂_k Q_li ∂_l Q_ki - ∂_k Q_ki ∂_l Q_li)`
/// pointwise and its integrated form.
pub fn divcurl_check(field: &QField, sp: &Spectral) -> DivCurlReport {
    let grad = gradient(field, sp);
    let dv = field.grid.cell_volume();
    let mut pointwise: f64 = 0.0;
    let (mut sg, mut sd, mut st) = (0.0, 0.0, 0.0);
    for idx in 0..field.grid.len() {
        let g2: f64 = (0..3).map(|a| grad[a][idx].norm_sq()).sum();
        let d = divergence_at(&grad, idx);
        let d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        let t = t_at(&grad, idx);
        let t2: f64 = t.iter().flatten().map(|x| x * x).sum();
        let mut null = 0.0;
        for k in 0..3 {
            for l in 0..3 {
                for i in 0..3 {
                    null += grad[k][idx].get(l, i) * grad[l][idx].get(k, i)
                        - grad[k][idx].get(k, i) * grad[l][idx].get(l, i);
                }
            }
        }
        let defect = g2 - 1.5 * d2 - 0.25 * t2 - null;
        pointwise = pointwise.max(defect.abs());
        sg += g2;
        sd += d2;
        st += t2;
    }
    DivCurlReport {
        pointwise,
        integrated: ((sd - 2.0 / 3.0 * sg + st / 6.0) * dv).abs(),
        grad_norm_sq: sg * dv,
    }
}

/// Random field from 12 Fourier modes with `|m_a| <= 3` and amplitudes
/// below 0.1, reproducible from `seed`.
pub fn random_band_limited(grid: PeriodicGrid, params: ModelParams, seed: u64) -> QField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<([f64; 3], SymTraceless3, f64)> = (0..12)
        .map(|_| {
            let k = std::array::from_fn(|a| {
                if a < grid.dim {
                    2.0 * PI * rng.gen_range(-3i32..=3) as f64 / grid.box_len[a]
                } else {
                    0.0
                }
            });
            let m = SymTraceless3(std::array::from_fn(|_| rng.gen_range(-0.1..0.1)));
            (k, m, rng.gen_range(0.0..2.0 * PI))
        })
        .collect();
    QField::from_fn(grid, params, move |x| {
        modes.iter().fold(SymTraceless3::ZERO, |acc, (k, m, ph)| {
            acc + *m * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + ph).cos()
        })
    })
}

/// `Σ_{i=0}^{2} k^{6i} ∫|∂^i (F - G)|^2` by Parseval.
pub fn error_energy(f: &QField, reference: &QField, k_scale: f64, sp: &Spectral) -> Result<f64> {
    if !f.grid.same_shape(&reference.grid) {
        return Err(Error::GridMismatch("fields live on different grids".into()));
    }
    let diff: [Vec<f64>; 5] = {
        let a = f.components();
        let b = reference.components();
        std::array::from_fn(|c| a[c].iter().zip(&b[c]).map(|(x, y)| x - y).collect())
    };
    let hats = forward_all(sp, &diff);
    let n = f.grid.len();
    let w = k_scale.powi(6);
    let mut total = 0.0;
    for i in 0..n {
        let k = sp.wavevector(i);
        let rho = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let c: [Complex64; 5] = std::array::from_fn(|q| hats[q][i]);
        let m = to_cmat(&c);
        let norm: f64 = m.iter().flatten().map(|z| z.norm_sqr()).sum();
        total += norm * (1.0 + w * rho + w * w * rho * rho);
    }
    Ok(total * f.grid.volume() / (n as f64 * n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::ModelParams;
    use std::f64::consts::PI;

    fn params(l: f64) -> ModelParams {
        ModelParams::new(l, 0.1).unwrap()
    }

    fn plane_wave(grid: PeriodicGrid, l: f64, kv: [f64; 3], m: SymTraceless3) -> QField {
        QField::from_fn(grid, params(l), move |x| {
            m * (kv[0] * x[0] + kv[1] * x[1] + kv[2] * x[2]).cos()
        })
    }

    fn symbol(l: f64, k: [f64; 3], m: &SymTraceless3) -> SymTraceless3 {
        // -|k|^2 M - (L/2)(k (Mk) + (Mk) k - (2/3)(k.Mk) I)
        let mk = m.apply(&k);
        let kmk: f64 = (0..3).map(|i| k[i] * mk[i]).sum();
        let rho: f64 = k.iter().map(|x| x * x).sum();
        let mut out = [[0.0; 3]; 3];
        let mm = m.matrix();
        for i in 0..3 {
            for j in 0..3 {
                let id = if i == j { 1.0 } else { 0.0 };
                out[i][j] = -rho * mm[i][j]
                    - 0.5 * l * (k[i] * mk[j] + mk[i] * k[j] - 2.0 / 3.0 * kmk * id);
            }
        }
        SymTraceless3::from_matrix(&out)
    }

    #[test]
    fn elastic_plane_wave_spectral_and_fd4() {
        let grid = PeriodicGrid::cube(3, 16, 1.0).unwrap();
        let sp = Spectral::new(&grid);
        let l = -0.7;
        let kv = [2.0 * PI, 4.0 * PI, -2.0 * PI];
        let m = SymTraceless3::from_components(0.3, -0.1, 0.2, -0.4, 0.15);
        let f = plane_wave(grid, l, kv, m);
        let s = symbol(l, kv, &m);
        let out = elastic_apply(&f, &sp);
        let fd = elastic_apply_fd4(&f);
        let fine = PeriodicGrid::cube(3, 32, 1.0).unwrap();
        let fd_fine = elastic_apply_fd4(&plane_wave(fine, l, kv, m));
        let mut e_sp: f64 = 0.0;
        let mut e_fd: f64 = 0.0;
        for i in 0..grid.len() {
            let x = grid.position(i);
            let c = (kv[0] * x[0] + kv[1] * x[1] + kv[2] * x[2]).cos();
            e_sp = e_sp.max((out.data[i] - s * c).max_abs());
            e_fd = e_fd.max((fd.data[i] - s * c).max_abs());
        }
        let mut e_fine: f64 = 0.0;
        for i in 0..fine.len() {
            let x = fine.position(i);
            let c = (kv[0] * x[0] + kv[1] * x[1] + kv[2] * x[2]).cos();
            e_fine = e_fine.max((fd_fine.data[i] - s * c).max_abs());
        }
        assert!(e_sp < 1e-10 * s.max_abs(), "{e_sp}");
        // fourth order: halving h cuts the error by about 16
        assert!(e_fd / e_fine > 12.0, "{e_fd} {e_fine}");
    }

    #[test]
    fn constant_field_and_isotropic_limit() {
        let grid = PeriodicGrid::cube(2, 16, 1.0).unwrap();
        let sp = Spectral::new(&grid);
        let m = SymTraceless3::from_components(0.2, 0.1, -0.3, 0.0, 0.5);
        let f = QField::from_fn(grid, params(-0.5), |_| m);
        assert!(elastic_apply(&f, &sp).max_abs() < 1e-14);
        assert!(elastic_apply_fd4(&f).max_abs() < 1e-12);
        let t = t_operator(&f, &sp);
        assert!(t.iter().flatten().flatten().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn energy_of_uniform_states() {
        let grid = PeriodicGrid::cube(2, 16, 1.0).unwrap();
        let sp = Spectral::new(&grid);
        let p = params(-0.5);
        assert_eq!(energy(&QField::zeros(grid, p), &sp), 0.0);
        let e0 = SymTraceless3::uniaxial(&[0.0, 0.6, 0.8]);
        let f = QField::from_fn(grid, p, |_| e0);
        assert!(energy(&f, &sp).abs() < 1e-12);
    }

    #[test]
    fn error_energy_closed_forms() {
        let grid = PeriodicGrid::new(2, &[32, 16], &[1.0, 0.5]).unwrap();
        let sp = Spectral::new(&grid);
        let p = params(-0.5);
        let m = SymTraceless3::from_components(0.3, -0.1, 0.2, -0.4, 0.15);
        let zero = QField::zeros(grid, p);
        let c = QField::from_fn(grid, p, |_| m);
        assert_eq!(error_energy(&zero, &zero, 0.1, &sp).unwrap(), 0.0);
        let v = error_energy(&c, &zero, 0.1, &sp).unwrap();
        assert!((v - m.norm_sq() * 0.5).abs() < 1e-13);
        let eps: f64 = 0.1;
        let w = QField::from_fn(grid, p, |x| m * (2.0 * PI * x[0]).cos());
        let tpi = 2.0 * PI;
        let exact = m.norm_sq()
            * 0.5
            * 0.5
            * (1.0 + eps.powi(6) * tpi.powi(2) + eps.powi(12) * tpi.powi(4));
        let v = error_energy(&w, &zero, eps, &sp).unwrap();
        assert!((v - exact).abs() < 1e-13, "{v} vs {exact}");
        let other = QField::zeros(PeriodicGrid::cube(2, 16, 1.0).unwrap(), p);
        assert!(error_energy(&zero, &other, 0.1, &sp).is_err());
    }

    #[test]
    fn divcurl_identity_on_random_fields() {
        let grid = PeriodicGrid::cube(3, 16, 1.0).unwrap();
        let sp = Spectral::new(&grid);
        for seed in 0..3 {
            let f = random_band_limited(grid, params(-0.5), seed);
            let r = divcurl_check(&f, &sp);
            assert!(r.grad_norm_sq > 1e-3);
            assert!(r.pointwise < 1e-10, "{}", r.pointwise);
            assert!(r.integrated < 1e-10, "{}", r.integrated);
        }
    }

    #[test]
    fn fast_update_matches_channel_split() {
        let c = |a: f64, b: f64| Complex64::new(a, b);
        let q = [
            c(0.3, -0.1),
            c(-0.2, 0.4),
            c(0.05, 0.2),
            c(-0.7, 0.1),
            c(0.15, -0.3),
        ];
        let f = [
            c(1.0, 0.2),
            c(0.1, -0.5),
            c(-0.3, 0.3),
            c(0.2, 0.0),
            c(0.6, 0.9),
        ];
        let (dt, l) = (0.013, -0.8);
        for k in [[3.0, -1.0, 2.0], [0.0, 5.0, 0.0], [1.0, 1.0, 0.0], [0.0; 3]] {
            let rho: f64 = k.iter().map(|x| x * x).sum();
            let (qp, t) = channel_parts(&q, &k);
            let (fp, _) = channel_parts(&f, &k);
            let mut want = [c(0.0, 0.0); 5];
            let mut el = 0.0;
            for ch in 0..3 {
                let stiff = rho * (1.0 + 0.5 * l * t[ch]);
                for i in 0..5 {
                    want[i] += (qp[ch][i] + fp[ch][i] * dt) / (1.0 + dt * stiff);
                }
                el += stiff * frob_sq(&qp[ch]);
            }
            let (got, gel) = semi_implicit_update(&q, &f, &k, dt, l);
            for i in 0..5 {
                assert!((got[i] - want[i]).norm() < 1e-13, "{k:?}");
            }
            assert!((gel - el).abs() < 1e-12 * (1.0 + el));
        }
    }
}
