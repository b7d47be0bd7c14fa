//! Uniform lattices over box domains.

use serde::Serialize;

use super::patch::Domain;
use crate::error::{invalid, Result};

/// Minimum number of nodes per axis for any differential operator.
pub const MIN_POINTS_PER_AXIS: usize = 5;

/// Uniform lattice with spacing `h`; axis 0 varies fastest in linear indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    lo: Vec<f64>,
    h: f64,
    dims: Vec<usize>,
    strides: Vec<usize>,
}

impl Grid {
    /// Lattice covering a box domain. Every box side must be an integer
    /// multiple of `h` (relative tolerance 1e-9).
    pub fn over(domain: &Domain, h: f64) -> Result<Self> {
        let (lo, hi) = match domain {
            Domain::Box { lo, hi } => (lo, hi),
            Domain::Ball { .. } => {
                return invalid("lattice fields need a box domain; ball domains are pointwise only")
            }
        };
        if !(h > 0.0 && h.is_finite()) {
            return invalid(format!("grid spacing must be positive, got {h}"));
        }
        let mut dims = Vec::with_capacity(lo.len());
        for (a, b) in lo.iter().zip(hi) {
            let cells = (b - a) / h;
            let rounded = cells.round();
            if (cells - rounded).abs() > 1e-9 * cells.max(1.0) || rounded < 1.0 {
                return invalid(format!("box side {} is not a multiple of h = {h}", b - a));
            }
            dims.push(rounded as usize + 1);
        }
        Ok(Self::from_parts(lo.clone(), h, dims))
    }

    pub fn from_parts(lo: Vec<f64>, h: f64, dims: Vec<usize>) -> Self {
        let mut strides = Vec::with_capacity(dims.len());
        let mut s = 1;
        for &d in &dims {
            strides.push(s);
            s *= d;
        }
        Self {
            lo,
            h,
            dims,
            strides,
        }
    }

    pub fn require_min_points(&self) -> Result<()> {
        if let Some(d) = self.dims.iter().find(|&&d| d < MIN_POINTS_PER_AXIS) {
            return invalid(format!(
                "grid has {d} points along an axis, need at least {MIN_POINTS_PER_AXIS}"
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn multi(&self, idx: usize) -> Vec<usize> {
        self.dims
            .iter()
            .zip(&self.strides)
            .map(|(&d, &s)| (idx / s) % d)
            .collect()
    }

    pub fn linear(&self, m: &[usize]) -> usize {
        m.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn coords(&self, idx: usize) -> Vec<f64> {
        self.multi(idx)
            .iter()
            .zip(&self.lo)
            .map(|(&k, &a)| a + k as f64 * self.h)
            .collect()
    }

    /// Distance, in nodes, to the nearest boundary face (0 on the boundary).
    pub fn depth(&self, idx: usize) -> usize {
        self.multi(idx)
            .iter()
            .zip(&self.dims)
            .map(|(&k, &d)| k.min(d - 1 - k))
            .min()
            .unwrap_or(0)
    }

    /// Index of the node nearest to `x` (clamped into the lattice).
    pub fn nearest(&self, x: &[f64]) -> usize {
        let m: Vec<usize> = x
            .iter()
            .zip(&self.lo)
            .zip(&self.dims)
            .map(|((&v, &a), &d)| (((v - a) / self.h).round().max(0.0) as usize).min(d - 1))
            .collect();
        self.linear(&m)
    }

    /// Number of cells (`∏(dims − 1)`).
    pub fn cell_count(&self) -> usize {
        self.dims.iter().map(|d| d - 1).product()
    }

    /// Lower-corner node of cell `c`, cells enumerated with axis 0 fastest.
    pub fn cell_origin(&self, c: usize) -> usize {
        let mut rem = c;
        let mut idx = 0;
        for (axis, &d) in self.dims.iter().enumerate() {
            let k = rem % (d - 1);
            rem /= d - 1;
            idx += k * self.strides[axis];
        }
        idx
    }

    /// Node indices of the `2ⁿ` corners of the cell at `origin`; bit `a` of
    /// the corner number selects the upper node along axis `a`.
    pub fn cell_corners(&self, origin: usize) -> Vec<usize> {
        let n = self.dim();
        (0..1usize << n)
            .map(|corner| {
                (0..n)
                    .filter(|a| corner >> a & 1 == 1)
                    .map(|a| self.strides[a])
                    .sum::<usize>()
                    + origin
            })
            .collect()
    }

    pub fn cell_center(&self, origin: usize) -> Vec<f64> {
        self.coords(origin)
            .iter()
            .map(|v| v + 0.5 * self.h)
            .collect()
    }

    /// Neighbor along `axis` in direction `dir` (±1), if inside the lattice.
    pub fn neighbor(&self, idx: usize, axis: usize, dir: isize) -> Option<usize> {
        let k = (idx / self.strides[axis]) % self.dims[axis];
        if dir < 0 && k == 0 || dir > 0 && k + 1 == self.dims[axis] {
            return None;
        }
        Some(if dir < 0 {
            idx - self.strides[axis]
        } else {
            idx + self.strides[axis]
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trip() {
        let g = Grid::over(
            &Domain::Box {
                lo: vec![0.0, -1.0, 2.0],
                hi: vec![1.0, 1.0, 2.5],
            },
            0.25,
        )
        .unwrap();
        assert_eq!(g.dims(), &[5, 9, 3]);
        for idx in 0..g.len() {
            assert_eq!(g.linear(&g.multi(idx)), idx);
            assert_eq!(g.nearest(&g.coords(idx)), idx);
        }
        assert_eq!(g.depth(g.linear(&[2, 4, 1])), 1);
        assert_eq!(g.cell_count(), 4 * 8 * 2);
        let o = g.cell_origin(g.cell_count() - 1);
        assert_eq!(g.multi(o), vec![3, 7, 1]);
        assert_eq!(*g.cell_corners(o).last().unwrap(), g.len() - 1);
    }

    #[test]
    fn rejects_incommensurate_spacing() {
        assert!(Grid::over(&Domain::cube(2, 1.0), 0.3).is_err());
        assert!(Grid::over(
            &Domain::Ball {
                center: vec![0.0, 0.0],
                radius: 1.0
            },
            0.1
        )
        .is_err());
        let g = Grid::over(&Domain::cube(2, 0.5), 0.5).unwrap();
        assert!(g.require_min_points().is_err());
    }
}
