//! Symmetric traceless 3x3 tensors and the Landau-de Gennes bulk algebra.
//!
//! Tensors are stored with five degrees of freedom `(xx, yy, xy, xz, yz)`;
//! the `zz` entry is `-(xx + yy)`. Symmetry and tracelessness therefore
//! hold by construction.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

/// Bulk coefficients and the two free parameters `L` and `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ModelParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub s_plus: f64,
    pub l: f64,
    pub epsilon: f64,
}

impl ModelParams {
    /// Equal-well parameters `a = 1, b = 9, c = 3, s+ = 1`.
    pub fn new(l: f64, epsilon: f64) -> Result<Self> {
        let p = ModelParams {
            a: 1.0,
            b: 9.0,
            c: 3.0,
            s_plus: 1.0,
            l,
            epsilon,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if (self.b * self.b - 27.0 * self.a * self.c).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "equal-well condition b^2 = 27ac violated (a={}, b={}, c={})",
                self.a, self.b, self.c
            )));
        }
        if !(self.l > -1.5 && self.l < 0.0) {
            return Err(Error::InvalidParams(format!(
                "L = {} must lie in (-3/2, 0)",
                self.l
            )));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParams(format!(
                "epsilon = {} must be positive",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// Normal-direction elastic coefficient `1 + 2L/3`.
    pub fn normal_stiffness(&self) -> f64 {
        1.0 + 2.0 * self.l / 3.0
    }
}

/// Symmetric traceless 3x3 tensor.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTraceless3(pub [f64; 5]);

impl SymTraceless3 {
    pub const ZERO: SymTraceless3 = SymTraceless3([0.0; 5]);

    pub fn from_components(xx: f64, yy: f64, xy: f64, xz: f64, yz: f64) -> Self {
        SymTraceless3([xx, yy, xy, xz, yz])
    }

    /// Projects an arbitrary matrix: symmetrize, then remove the trace.
    pub fn from_matrix(m: &Mat3) -> Self {
        let tr = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
        SymTraceless3([
            m[0][0] - tr,
            m[1][1] - tr,
            0.5 * (m[0][1] + m[1][0]),
            0.5 * (m[0][2] + m[2][0]),
            0.5 * (m[1][2] + m[2][1]),
        ])
    }

    /// `a b^T + b a^T`.
    pub fn sym_outer(a: &Vec3, b: &Vec3) -> Self {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = a[i] * b[j] + b[i] * a[j];
            }
        }
        Self::from_matrix(&m)
    }

    /// `n n^T - I/3` for a unit vector `n` (not checked).
    pub fn uniaxial(n: &Vec3) -> Self {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = n[i] * n[j];
            }
        }
        Self::from_matrix(&m)
    }

    pub fn matrix(&self) -> Mat3 {
        let [xx, yy, xy, xz, yz] = self.0;
        [[xx, xy, xz], [xy, yy, yz], [xz, yz, -xx - yy]]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix()[i][j]
    }

    /// Frobenius inner product `Q:P`.
    pub fn dot(&self, other: &Self) -> f64 {
        let [a0, a1, a2, a3, a4] = self.0;
        let [b0, b1, b2, b3, b4] = other.0;
        let azz = -a0 - a1;
        let bzz = -b0 - b1;
        a0 * b0 + a1 * b1 + azz * bzz + 2.0 * (a2 * b2 + a3 * b3 + a4 * b4)
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `Tr(Q^3)`, which equals `3 det Q` for traceless `Q`.
    pub fn trace_cube(&self) -> f64 {
        let m = self.matrix();
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        3.0 * det
    }

    /// Largest eigenvalue, by the trigonometric formula for traceless
    /// symmetric matrices.
    pub fn max_eigenvalue(&self) -> f64 {
        let j2 = 0.5 * self.norm_sq();
        if j2 == 0.0 {
            return 0.0;
        }
        let det = self.trace_cube() / 3.0;
        let c = (1.5 * 3f64.sqrt() * det / j2.powf(1.5)).clamp(-1.0, 1.0);
        2.0 * (j2 / 3.0).sqrt() * (c.acos() / 3.0).cos()
    }

    /// Symmetric part of `QP + PQ`, returned as a full matrix (it has a trace).
    pub fn anticommutator(&self, other: &Self) -> Mat3 {
        let a = self.matrix();
        let b = other.matrix();
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += a[i][k] * b[k][j] + b[i][k] * a[k][j];
                }
                m[i][j] = acc;
            }
        }
        m
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        let m = self.matrix();
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    /// Rotation `R Q R^T`.
    pub fn rotate(&self, r: &Mat3) -> Self {
        let q = self.matrix();
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        acc += r[i][k] * q[k][l] * r[j][l];
                    }
                }
                out[i][j] = acc;
            }
        }
        Self::from_matrix(&out)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix()
            .iter()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Add for SymTraceless3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut r = self.0;
        for (a, b) in r.iter_mut().zip(o.0) {
            *a += b;
        }
        SymTraceless3(r)
    }
}

impl AddAssign for SymTraceless3 {
    fn add_assign(&mut self, o: Self) {
        for (a, b) in self.0.iter_mut().zip(o.0) {
            *a += b;
        }
    }
}

impl Sub for SymTraceless3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for SymTraceless3 {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl Mul<f64> for SymTraceless3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        SymTraceless3(self.0.map(|v| v * s))
    }
}

impl Mul<SymTraceless3> for f64 {
    type Output = SymTraceless3;
    fn mul(self, q: SymTraceless3) -> SymTraceless3 {
        q * self
    }
}

pub fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn normalize3(a: &Vec3) -> Option<Vec3> {
    let n = dot3(a, a).sqrt();
    (n > 0.0 && n.is_finite()).then(|| [a[0] / n, a[1] / n, a[2] / n])
}

/// Orthonormal triple `(n, l, m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    n: Vec3,
    l: Vec3,
    m: Vec3,
    right_handed: bool,
}

const FRAME_TOL: f64 = 1e-12;

impl Frame {
    pub fn new(n: Vec3, l: Vec3, m: Vec3) -> Result<Self> {
        for (name, v) in [("n", &n), ("l", &l), ("m", &m)] {
            let len = dot3(v, v).sqrt();
            if (len - 1.0).abs() > FRAME_TOL {
                return Err(Error::InvalidFrame(format!("|{name}| = {len}")));
            }
        }
        for (name, a, b) in [("n.l", &n, &l), ("n.m", &n, &m), ("l.m", &l, &m)] {
            let d = dot3(a, b);
            if d.abs() > FRAME_TOL {
                return Err(Error::InvalidFrame(format!("{name} = {d:e}")));
            }
        }
        let orient = dot3(&n, &cross3(&l, &m));
        if (orient.abs() - 1.0).abs() > FRAME_TOL {
            return Err(Error::InvalidFrame(format!("n.(l x m) = {orient}")));
        }
        Ok(Frame {
            n,
            l,
            m,
            right_handed: orient > 0.0,
        })
    }

    pub fn standard() -> Self {
        Frame {
            n: [1.0, 0.0, 0.0],
            l: [0.0, 1.0, 0.0],
            m: [0.0, 0.0, 1.0],
            right_handed: true,
        }
    }

    /// Right-handed frame whose first axis is `n`; `l`, `m` are completed
    /// deterministically.
    pub fn from_director(n: Vec3) -> Result<Self> {
        let n = normalize3(&n).ok_or_else(|| Error::InvalidFrame("zero director".into()))?;
        // pick the coordinate axis least aligned with n
        let mut axis = [0.0; 3];
        let k = (0..3)
            .min_by(|&a, &b| n[a].abs().partial_cmp(&n[b].abs()).unwrap())
            .unwrap();
        axis[k] = 1.0;
        let l = normalize3(&cross3(&n, &axis)).unwrap();
        let m = cross3(&n, &l);
        Frame::new(n, l, m)
    }

    pub fn n(&self) -> Vec3 {
        self.n
    }
    pub fn l(&self) -> Vec3 {
        self.l
    }
    pub fn m(&self) -> Vec3 {
        self.m
    }
    pub fn is_right_handed(&self) -> bool {
        self.right_handed
    }

    pub fn rotate(&self, r: &Mat3) -> Result<Self> {
        let mv = |v: &Vec3| -> Vec3 { [dot3(&r[0], v), dot3(&r[1], v), dot3(&r[2], v)] };
        Frame::new(mv(&self.n), mv(&self.l), mv(&self.m))
    }
}

/// Squared norms of `E^0..E^4`.
pub const BASIS_NORM_SQ: [f64; 5] = [2.0 / 3.0, 2.0, 2.0, 2.0, 2.0];

/// The basis `E^0..E^4` generated by a frame.
pub fn basis_from_frame(frame: &Frame) -> [SymTraceless3; 5] {
    let (n, l, m) = (frame.n, frame.l, frame.m);
    let mut e4 = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            e4[i][j] = l[i] * l[j] - m[i] * m[j];
        }
    }
    [
        SymTraceless3::uniaxial(&n),
        SymTraceless3::sym_outer(&n, &l),
        SymTraceless3::sym_outer(&n, &m),
        SymTraceless3::sym_outer(&m, &l),
        SymTraceless3::from_matrix(&e4),
    ]
}

/// Coefficients of a tensor in the `E^0..E^4` basis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BasisCoeffs(pub [f64; 5]);

pub fn decompose(q: &SymTraceless3, frame: &Frame) -> BasisCoeffs {
    let e = basis_from_frame(frame);
    let mut c = [0.0; 5];
    for i in 0..5 {
        c[i] = q.dot(&e[i]) / BASIS_NORM_SQ[i];
    }
    BasisCoeffs(c)
}

pub fn reconstruct(c: &BasisCoeffs, frame: &Frame) -> SymTraceless3 {
    let e = basis_from_frame(frame);
    let mut q = SymTraceless3::ZERO;
    for i in 0..5 {
        q += e[i] * c.0[i];
    }
    q
}

/// Bulk energy density `F(Q) = a/2 TrQ^2 - b/3 TrQ^3 + c/4 (TrQ^2)^2`.
pub fn bulk_potential(q: &SymTraceless3, p: &ModelParams) -> f64 {
    let t2 = q.norm_sq();
    let t3 = q.trace_cube();
    0.5 * p.a * t2 - p.b / 3.0 * t3 + 0.25 * p.c * t2 * t2
}

/// Bulk force `f(Q) = -(aQ - b(Q^2 - |Q|^2 I/3) + c|Q|^2 Q)`.
pub fn bulk_force(q: &SymTraceless3, p: &ModelParams) -> SymTraceless3 {
    let t2 = q.norm_sq();
    let m = q.matrix();
    let mut q2 = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            q2[i][j] = (0..3).map(|k| m[i][k] * m[k][j]).sum();
        }
    }
    let q2 = SymTraceless3::from_matrix(&q2);
    -(*q * (p.a + p.c * t2) - q2 * p.b)
}

/// `B(Q,P) = -b((2/3) I (Q:P) - QP - PQ)`.
pub fn taylor_b(q: &SymTraceless3, p_: &SymTraceless3, p: &ModelParams) -> SymTraceless3 {
    // the identity part is removed by the traceless projection
    SymTraceless3::from_matrix(&q.anticommutator(p_)) * p.b
}

/// `C(Q,P,R) = -c(Q(P:R) + R(Q:P) + P(Q:R))`.
pub fn taylor_c(
    q: &SymTraceless3,
    p_: &SymTraceless3,
    r: &SymTraceless3,
    p: &ModelParams,
) -> SymTraceless3 {
    -(*q * p_.dot(r) + *r * q.dot(p_) + *p_ * q.dot(r)) * p.c
}

/// Linearization of `f` at `P` applied to `Q`: `-aQ + B(Q,P) + C(Q,P,P)`.
pub fn hessian_apply(p_: &SymTraceless3, q: &SymTraceless3, p: &ModelParams) -> SymTraceless3 {
    -(*q * p.a) + taylor_b(q, p_, p) + taylor_c(q, p_, p_, p)
}

/// Second derivative of `f` at `P` in direction `Q`: `B(Q,Q) + 2C(Q,Q,P)`.
pub fn f_second(p_: &SymTraceless3, q: &SymTraceless3, p: &ModelParams) -> SymTraceless3 {
    taylor_b(q, q, p) + taylor_c(q, q, p_, p) * 2.0
}

/// Inverse of `|H|` at the nematic well `E^0` on the complement of its kernel.
///
/// `H` at `E^0` has eigenvalue `-1` on `E^0`, `0` on `E^1, E^2` and `-9` on
/// `E^3, E^4`; the returned tensor `R` satisfies `H R = -Q`.
pub fn hplus_inverse(q: &SymTraceless3, frame: &Frame) -> Result<SymTraceless3> {
    let c = decompose(q, frame);
    let scale = q.norm().max(1.0);
    if c.0[1].abs() > 1e-10 * scale || c.0[2].abs() > 1e-10 * scale {
        return Err(Error::Domain(format!(
            "input has kernel components q1 = {:e}, q2 = {:e}",
            c.0[1], c.0[2]
        )));
    }
    let n = frame.n;
    let nqn = dot3(&n, &q.apply(&n));
    let qn = q.apply(&n);
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let id = if i == j { 1.0 } else { 0.0 };
            let nn = n[i] * n[j];
            let nnq: f64 = n[i] * qn[j] + qn[i] * n[j];
            m[i][j] = (q.get(i, j) - nnq + 2.0 / 3.0 * nqn * id) / 9.0
                + 14.0 / 9.0 * (nn - id / 3.0) * nqn;
        }
    }
    Ok(SymTraceless3::from_matrix(&m))
}
