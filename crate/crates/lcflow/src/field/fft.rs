use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::PeriodicGrid;

/// Cached FFT plans and wavenumbers for a periodic grid.
#[derive(Clone)]
pub struct Spectral {
    grid: PeriodicGrid,
    fwd: Vec<Arc<dyn Fft<f64>>>,
    inv: Vec<Arc<dyn Fft<f64>>>,
    /// Wavenumbers per axis, Nyquist mode set to zero.
    k: [Vec<f64>; 3],
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral")
            .field("grid", &self.grid)
            .finish()
    }
}

impl Spectral {
    pub fn new(grid: &PeriodicGrid) -> Self {
        let mut planner = FftPlanner::new();
        let mut fwd = Vec::new();
        let mut inv = Vec::new();
        for a in 0..grid.dim {
            fwd.push(planner.plan_fft_forward(grid.n[a]));
            inv.push(planner.plan_fft_inverse(grid.n[a]));
        }
        let k = std::array::from_fn(|a| {
            let n = grid.n[a];
            if a >= grid.dim {
                return vec![0.0];
            }
            let base = 2.0 * std::f64::consts::PI / grid.box_len[a];
            (0..n)
                .map(|j| {
                    if 2 * j == n {
                        0.0
                    } else if 2 * j < n {
                        base * j as f64
                    } else {
                        base * (j as f64 - n as f64)
                    }
                })
                .collect()
        });
        Spectral {
            grid: *grid,
            fwd,
            inv,
            k,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    /// Wavevector of a Fourier index.
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let m = self.grid.multi_index(idx);
        [self.k[0][m[0]], self.k[1][m[1]], self.k[2][m[2]]]
    }

    fn transform(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        const BLOCK: usize = 16;
        let g = &self.grid;
        let zero = Complex64::new(0.0, 0.0);
        let mut buf = Vec::new();
        for a in 0..g.dim {
            let n = g.n[a];
            let stride: usize = g.n[a + 1..].iter().product();
            let outer: usize = g.n[..a].iter().product();
            let mut scratch = vec![zero; plans[a].get_inplace_scratch_len()];
            if stride == 1 {
                plans[a].process_with_scratch(data, &mut scratch);
                continue;
            }
            for o in 0..outer {
                let mut s0 = 0;
                while s0 < stride {
                    let w = BLOCK.min(stride - s0);
                    buf.resize(w * n, zero);
                    // gather `w` neighbouring lines, one per row of `buf`
                    for j in 0..n {
                        let row = o * n * stride + j * stride + s0;
                        for (b, v) in data[row..row + w].iter().enumerate() {
                            buf[b * n + j] = *v;
                        }
                    }
                    plans[a].process_with_scratch(&mut buf, &mut scratch);
                    for j in 0..n {
                        let row = o * n * stride + j * stride + s0;
                        for (b, v) in data[row..row + w].iter_mut().enumerate() {
                            *v = buf[b * n + j];
                        }
                    }
                    s0 += w;
                }
            }
        }
    }

    pub fn forward(&self, real: &[f64]) -> Vec<Complex64> {
        let mut d: Vec<Complex64> = real.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.transform(&mut d, &self.fwd);
        d
    }

    /// Inverse transform, normalized, real part.
    pub fn inverse(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut spec, &self.inv);
        let scale = 1.0 / self.grid.len() as f64;
        spec.iter().map(|c| c.re * scale).collect()
    }

    /// `∂_axis u` by spectral differentiation.
    pub fn derivative(&self, u_hat: &[Complex64], axis: usize) -> Vec<f64> {
        let d: Vec<Complex64> = u_hat
            .iter()
            .enumerate()
            .map(|(i, c)| c * Complex64::new(0.0, self.wavevector(i)[axis]))
            .collect();
        self.inverse(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn derivative_of_trig_product() {
        let g = PeriodicGrid::new(3, &[16, 20, 24], &[1.0, 2.0, 0.5]).unwrap();
        let sp = Spectral::new(&g);
        let u: Vec<f64> = (0..g.len())
            .map(|i| {
                let x = g.position(i);
                (2.0 * PI * x[0]).sin() * (PI * x[1]).cos() * (4.0 * PI * x[2]).sin()
            })
            .collect();
        let uh = sp.forward(&u);
        let back = sp.inverse(uh.clone());
        for (a, b) in u.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13);
        }
        let dy = sp.derivative(&uh, 1);
        for i in 0..g.len() {
            let x = g.position(i);
            let exact = -PI * (2.0 * PI * x[0]).sin() * (PI * x[1]).sin() * (4.0 * PI * x[2]).sin();
            assert!((dy[i] - exact).abs() < 1e-12);
        }
    }
}
