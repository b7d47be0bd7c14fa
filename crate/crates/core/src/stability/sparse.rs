//! Compressed-row symmetric matrices and a banded `LDLᵀ` factorization.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Symmetric matrix in CSR form; both triangles are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSym {
    /// Duplicate entries are summed in insertion order.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len() / 4);
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len() / 4);
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().expect("entry exists") += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }

    pub fn bandwidth(&self) -> usize {
        (0..self.dim)
            .flat_map(|r| self.row(r).map(move |(c, _)| r.abs_diff(c)))
            .max()
            .unwrap_or(0)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, s: f64, other: &SparseSym) -> SparseSym {
        let mut t = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.dim {
            t.extend(self.row(r).map(|(c, v)| (r, c, v)));
            t.extend(other.row(r).map(|(c, v)| (r, c, s * v)));
        }
        SparseSym::from_triplets(self.dim, t)
    }
}

/// `LDLᵀ` of a symmetric banded matrix, without pivoting.
#[derive(Debug, Clone)]
pub struct BandLdlt {
    dim: usize,
    bw: usize,
    // row i holds L[i, i−bw..i] followed by d_i
    data: Vec<f64>,
}

impl BandLdlt {
    /// Factors `a + s·b`; fails on a pivot that is tiny relative to its row.
    pub fn factor(a: &SparseSym, s: f64, b: &SparseSym) -> Result<Self> {
        let dim = a.dim();
        let bw = a.bandwidth().max(b.bandwidth());
        let w = bw + 1;
        let mut data = vec![0.0; dim * w];
        let mut row_scale = vec![0.0f64; dim];
        for (m, scale) in [(a, 1.0), (b, s)] {
            for r in 0..dim {
                for (c, v) in m.row(r) {
                    if c <= r {
                        data[r * w + c + bw - r] += scale * v;
                    }
                    row_scale[r] = row_scale[r].max((scale * v).abs());
                }
            }
        }
        let mut t = vec![0.0; w];
        for i in 0..dim {
            let lo = i.saturating_sub(bw);
            t.iter_mut().for_each(|v| *v = 0.0);
            for j in lo..i {
                // overlap of rows i and j: columns lo..j
                let len = j - lo;
                let ti = &t[lo + bw - i..lo + bw - i + len];
                let lj = &data[j * w + lo + bw - j..j * w + bw];
                let dotp: f64 = ti.iter().zip(lj).map(|(x, y)| x * y).sum();
                let s_ij = data[i * w + j + bw - i] - dotp;
                t[j + bw - i] = s_ij;
                data[i * w + j + bw - i] = s_ij / data[j * w + bw];
            }
            let li = &data[i * w + lo + bw - i..i * w + bw];
            let tt = &t[lo + bw - i..bw];
            let d = data[i * w + bw] - li.iter().zip(tt).map(|(x, y)| x * y).sum::<f64>();
            if !(d.abs() > 1e-13 * row_scale[i].max(f64::MIN_POSITIVE)) || !d.is_finite() {
                return Err(Error::NumericalFailure(format!(
                    "LDLt breakdown at pivot {i} of {dim}: d = {d:e}, row scale {:e}, shift {s}",
                    row_scale[i]
                )));
            }
            data[i * w + bw] = d;
        }
        Ok(Self { dim, bw, data })
    }

    pub fn negative_pivots(&self) -> usize {
        let w = self.bw + 1;
        (0..self.dim)
            .filter(|i| self.data[i * w + self.bw] < 0.0)
            .count()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (bw, w) = (self.bw, self.bw + 1);
        let mut x = b.to_vec();
        for i in 0..self.dim {
            let lo = i.saturating_sub(bw);
            let li = &self.data[i * w + lo + bw - i..i * w + bw];
            x[i] -= li.iter().zip(&x[lo..i]).map(|(l, v)| l * v).sum::<f64>();
        }
        for i in 0..self.dim {
            x[i] /= self.data[i * w + bw];
        }
        for i in (0..self.dim).rev() {
            let lo = i.saturating_sub(bw);
            let xi = x[i];
            let li = &self.data[i * w + lo + bw - i..i * w + bw];
            for (k, l) in li.iter().enumerate() {
                x[lo + k] -= l * xi;
            }
        }
        x
    }
}
