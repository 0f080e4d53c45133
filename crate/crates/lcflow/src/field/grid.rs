use crate::error::{Error, Result};
use crate::tensor::{ModelParams, SymTraceless3};

/// Uniform periodic grid in 1, 2 or 3 dimensions. Unused axes have one node.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PeriodicGrid {
    pub dim: usize,
    pub n: [usize; 3],
    pub box_len: [f64; 3],
}

impl PeriodicGrid {
    pub fn new(dim: usize, n: &[usize], box_len: &[f64]) -> Result<Self> {
        if !(1..=3).contains(&dim) || n.len() != dim || box_len.len() != dim {
            return Err(Error::Config(format!(
                "grid needs dim in 1..=3 with matching sizes (dim {dim}, {} sizes, {} lengths)",
                n.len(),
                box_len.len()
            )));
        }
        let mut nn = [1; 3];
        let mut bb = [1.0; 3];
        for a in 0..dim {
            if n[a] < 16 || !n[a].is_multiple_of(2) {
                return Err(Error::Config(format!(
                    "axis {a}: {} nodes (need an even count >= 16)",
                    n[a]
                )));
            }
            if !(box_len[a] > 0.0) || !box_len[a].is_finite() {
                return Err(Error::Config(format!(
                    "axis {a}: box length {}",
                    box_len[a]
                )));
            }
            nn[a] = n[a];
            bb[a] = box_len[a];
        }
        Ok(PeriodicGrid {
            dim,
            n: nn,
            box_len: bb,
        })
    }

    /// Cube `[0, box)^dim` with `n` nodes per axis.
    pub fn cube(dim: usize, n: usize, box_len: f64) -> Result<Self> {
        PeriodicGrid::new(dim, &vec![n; dim], &vec![box_len; dim])
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn h(&self, axis: usize) -> f64 {
        self.box_len[axis] / self.n[axis] as f64
    }

    pub fn min_h(&self) -> f64 {
        (0..self.dim)
            .map(|a| self.h(a))
            .fold(f64::INFINITY, f64::min)
    }

    /// Volume element.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.h(a)).product()
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|a| self.box_len[a]).product()
    }

    /// Row-major index, last axis fastest.
    pub fn index(&self, i: [usize; 3]) -> usize {
        (i[0] * self.n[1] + i[1]) * self.n[2] + i[2]
    }

    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let i2 = idx % self.n[2];
        let r = idx / self.n[2];
        [r / self.n[1], r % self.n[1], i2]
    }

    /// Coordinates of a node (zero on unused axes).
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let m = self.multi_index(idx);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = m[a] as f64 * self.h(a);
        }
        x
    }

    pub fn same_shape(&self, other: &PeriodicGrid) -> bool {
        self.dim == other.dim && self.n == other.n && self.box_len == other.box_len
    }
}

/// Largest `|Q|` accepted on a simulated field.
pub const Q_BOUND: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct QField {
    pub grid: PeriodicGrid,
    pub data: Vec<SymTraceless3>,
    pub params: ModelParams,
    pub time: f64,
}

impl QField {
    pub fn zeros(grid: PeriodicGrid, params: ModelParams) -> Self {
        QField {
            grid,
            data: vec![SymTraceless3::ZERO; grid.len()],
            params,
            time: 0.0,
        }
    }

    /// Samples `f(x)` at every node.
    pub fn from_fn(
        grid: PeriodicGrid,
        params: ModelParams,
        f: impl Fn([f64; 3]) -> SymTraceless3 + Sync,
    ) -> Self {
        use rayon::prelude::*;
        let data = (0..grid.len())
            .into_par_iter()
            .map(|i| f(grid.position(i)))
            .collect();
        QField {
            grid,
            data,
            params,
            time: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.data.len() != self.grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} nodes for a grid of {}",
                self.data.len(),
                self.grid.len()
            )));
        }
        for (i, q) in self.data.iter().enumerate() {
            if !q.is_finite() || q.norm() > Q_BOUND {
                return Err(Error::Domain(format!(
                    "node {i}: |Q| = {} outside the physical range",
                    q.norm()
                )));
            }
        }
        Ok(())
    }

    /// Component arrays `(xx, yy, xy, xz, yz)`.
    pub fn components(&self) -> [Vec<f64>; 5] {
        std::array::from_fn(|c| self.data.iter().map(|q| q.0[c]).collect())
    }

    pub fn set_components(&mut self, comps: &[Vec<f64>; 5]) {
        for (i, q) in self.data.iter_mut().enumerate() {
            *q = SymTraceless3(std::array::from_fn(|c| comps[c][i]));
        }
    }

    pub fn with_components(&self, comps: &[Vec<f64>; 5]) -> QField {
        let mut out = self.clone();
        out.set_components(comps);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|q| q.max_abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rules() {
        assert!(PeriodicGrid::cube(2, 15, 1.0).is_err());
        assert!(PeriodicGrid::cube(2, 17, 1.0).is_err());
        assert!(PeriodicGrid::cube(4, 16, 1.0).is_err());
        let g = PeriodicGrid::new(3, &[16, 18, 20], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(g.len(), 16 * 18 * 20);
        for idx in [0, 17, 999, g.len() - 1] {
            assert_eq!(g.index(g.multi_index(idx)), idx);
        }
        assert!((g.volume() - 6.0).abs() < 1e-15);
        assert!((g.cell_volume() * g.len() as f64 - 6.0).abs() < 1e-12);
    }
}
