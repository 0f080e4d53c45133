use super::QField;
use crate::error::{Error, Result};
use crate::tensor::{dot3, Vec3};

/// Layer midpoint level of the normalized order `q0 = (3/2) n·Qn`.
pub const MIDPOINT: f64 = 0.5;

/// How to read the interface off a field.
pub enum Probe<'a> {
    /// Planar layers normal to `axis`, read along lines parallel to it.
    Flat { axis: usize, director: Vec3 },
    /// Closed interface around `center`; `director` gives `n(x)`, or the
    /// principal axis of `Q` is used when it is `None`.
    Radial {
        center: Vec3,
        director: Option<&'a (dyn Fn(Vec3) -> Vec3 + Sync)>,
    },
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum Interface {
    /// Crossing positions along the axis, averaged over grid lines, in
    /// increasing order; `spread` is the largest standard deviation.
    Flat { crossings: Vec<f64>, spread: f64 },
    /// Mean distance of the crossings from the center and its standard
    /// deviation.
    Radial {
        radius: f64,
        spread: f64,
        samples: usize,
    },
}

impl Interface {
    /// First crossing (flat) or radius (radial).
    pub fn primary(&self) -> f64 {
        match self {
            Interface::Flat { crossings, .. } => crossings[0],
            Interface::Radial { radius, .. } => *radius,
        }
    }
}

fn order_at(field: &QField, idx: usize, n: &Vec3) -> f64 {
    1.5 * dot3(n, &field.data[idx].apply(n))
}

/// Crossings of `q0 = 1/2` by linear interpolation between neighbouring
/// nodes along every grid line of `axis`. Returns node positions with the
/// crossing coordinate substituted on `axis`.
fn line_crossings(field: &QField, axis: usize, q0: &[f64]) -> Vec<(usize, Vec3)> {
    let g = &field.grid;
    let n = g.n[axis];
    let h = g.h(axis);
    let mut out = Vec::new();
    for idx in 0..g.len() {
        let m = g.multi_index(idx);
        if m[axis] != 0 {
            continue;
        }
        let mut line = 0;
        for j in 0..n {
            let mut a = m;
            a[axis] = j;
            let mut b = m;
            b[axis] = (j + 1) % n;
            let (va, vb) = (q0[g.index(a)] - MIDPOINT, q0[g.index(b)] - MIDPOINT);
            if va == 0.0 || (va < 0.0) != (vb < 0.0) && vb != 0.0 {
                let t = if va == 0.0 { 0.0 } else { va / (va - vb) };
                let mut x = g.position(g.index(a));
                x[axis] += t * h;
                out.push((line, x));
                line += 1;
            }
        }
    }
    out
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Locates the level set `q0 = 1/2`.
pub fn interface_locate(field: &QField, probe: &Probe) -> Result<Interface> {
    let g = &field.grid;
    match probe {
        Probe::Flat { axis, director } => {
            if *axis >= g.dim {
                return Err(Error::Config(format!(
                    "axis {axis} outside a {}-d grid",
                    g.dim
                )));
            }
            let q0: Vec<f64> = (0..g.len()).map(|i| order_at(field, i, director)).collect();
            let found = line_crossings(field, *axis, &q0);
            let lines = g.len() / g.n[*axis];
            let per_line = found.iter().map(|c| c.0 + 1).max().unwrap_or(0);
            if per_line == 0 || found.len() != per_line * lines {
                return Err(Error::NotLayered(format!(
                    "{} crossings of q0 = 1/2 on {lines} lines along axis {axis}",
                    found.len()
                )));
            }
            let mut crossings = Vec::with_capacity(per_line);
            let mut spread: f64 = 0.0;
            for k in 0..per_line {
                let xs: Vec<f64> = found
                    .iter()
                    .filter(|c| c.0 == k)
                    .map(|c| c.1[*axis])
                    .collect();
                let (m, s) = mean_std(&xs);
                crossings.push(m);
                spread = spread.max(s);
            }
            Ok(Interface::Flat { crossings, spread })
        }
        Probe::Radial { center, director } => {
            if g.dim < 2 {
                return Err(Error::Config("radial interfaces need dim >= 2".into()));
            }
            let q0: Vec<f64> = (0..g.len())
                .map(|i| match director {
                    Some(n) => order_at(field, i, &n(g.position(i))),
                    None => 1.5 * field.data[i].max_eigenvalue(),
                })
                .collect();
            let mut radii = Vec::new();
            for axis in 0..g.dim {
                for (_, x) in line_crossings(field, axis, &q0) {
                    let mut r2 = 0.0;
                    for a in 0..g.dim {
                        let l = g.box_len[a];
                        let mut d = x[a] - center[a];
                        d -= l * (d / l).round();
                        r2 += d * d;
                    }
                    radii.push(r2.sqrt());
                }
            }
            if radii.is_empty() {
                return Err(Error::NotLayered("no crossing of q0 = 1/2".into()));
            }
            let (radius, spread) = mean_std(&radii);
            Ok(Interface::Radial {
                radius,
                spread,
                samples: radii.len(),
            })
        }
    }
}
