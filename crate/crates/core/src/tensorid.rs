//! Third-order tensor identities in a frame diagonalizing the second
//! fundamental form.

use nalgebra::DMatrix;

use crate::curvalg::ShapeOperator;
use crate::error::{invalid, Error, Result};

/// Below this `|A|` the `|A|^{-2}` normalization is refused.
pub const MIN_NORM_A: f64 = 1e-10;
/// Default absolute tolerance for equality-case and rank tests.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Fully symmetric `n×n×n` array `C_ijk` (components of `∇A`).
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSymTensor {
    n: usize,
    data: Vec<f64>,
}

impl CubicSymTensor {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    /// Builds from raw entries (`data[(i*n + j)*n + k]`), averaging over all
    /// index permutations.
    pub fn from_raw(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || data.len() != n * n * n {
            return invalid(format!(
                "expected {} entries for n = {n}, got {}",
                n * n * n,
                data.len()
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return invalid("tensor entries must be finite");
        }
        let raw = Self { n, data };
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let perms = [
                        raw.get(i, j, k),
                        raw.get(i, k, j),
                        raw.get(j, i, k),
                        raw.get(j, k, i),
                        raw.get(k, i, j),
                        raw.get(k, j, i),
                    ];
                    out.data[(i * n + j) * n + k] = perms.iter().sum::<f64>() / 6.0;
                }
            }
        }
        Ok(out)
    }

    /// Tensor with the single orbit `{i,j,k}` set to `value` in every slot.
    pub fn with_orbit(n: usize, idx: [usize; 3], value: f64) -> Self {
        let mut t = Self::zeros(n);
        t.set_orbit(idx, value);
        t
    }

    pub fn set_orbit(&mut self, [i, j, k]: [usize; 3], value: f64) {
        let n = self.n;
        for (a, b, c) in [
            (i, j, k),
            (i, k, j),
            (j, i, k),
            (j, k, i),
            (k, i, j),
            (k, j, i),
        ] {
            self.data[(a * n + b) * n + c] = value;
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Diagonal entries `h_ii` of the second fundamental form in a principal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalShape {
    h: Vec<f64>,
}

impl DiagonalShape {
    pub fn new(h: Vec<f64>) -> Result<Self> {
        if h.is_empty() || h.iter().any(|v| !v.is_finite()) {
            return invalid("diagonal shape needs at least one finite entry");
        }
        Ok(Self { h })
    }

    pub fn dim(&self) -> usize {
        self.h.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.h
    }

    /// `|A|² = Σ h_ii²`.
    pub fn norm_sq(&self) -> f64 {
        self.h.iter().map(|v| v * v).sum()
    }
}

fn check_dims(h: &DiagonalShape, c: &CubicSymTensor) -> Result<()> {
    if h.dim() != c.dim() {
        return invalid(format!(
            "dimension mismatch: shape {} vs tensor {}",
            h.dim(),
            c.dim()
        ));
    }
    Ok(())
}

fn norm_a_sq(h: &DiagonalShape) -> Result<f64> {
    let a2 = h.norm_sq();
    if a2.sqrt() < MIN_NORM_A {
        return Err(Error::DivisionByZero(format!(
            "|A| = {:.3e} below {MIN_NORM_A:e}",
            a2.sqrt()
        )));
    }
    Ok(a2)
}

/// `Σ C_ijk² − Σ_k (Σ_i h_ii C_iik)² / |A|²`, i.e. `|∇A|² − |∇|A||²`.
pub fn ssy_left(h: &DiagonalShape, c: &CubicSymTensor) -> Result<f64> {
    check_dims(h, c)?;
    let a2 = norm_a_sq(h)?;
    let n = h.dim();
    let grad: f64 = (0..n)
        .map(|k| {
            let t: f64 = (0..n).map(|i| h.h[i] * c.get(i, i, k)).sum();
            t * t
        })
        .sum();
    Ok(c.norm_sq() - grad / a2)
}

/// Sum-of-squares form of [`ssy_left`]:
/// `½ Σ_{i,s,k} (h_ii C_ssk − h_ss C_iik)² / |A|² + 2 Σ_{i≠j} C_iij² + Σ_{i,j,k distinct} C_ijk²`.
pub fn ssy_right(h: &DiagonalShape, c: &CubicSymTensor) -> Result<f64> {
    check_dims(h, c)?;
    let a2 = norm_a_sq(h)?;
    let n = h.dim();
    let mut cross = 0.0;
    for i in 0..n {
        for s in 0..n {
            for k in 0..n {
                let d = h.h[i] * c.get(s, s, k) - h.h[s] * c.get(i, i, k);
                cross += d * d;
            }
        }
    }
    let mut pairs = 0.0;
    let mut distinct = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            pairs += c.get(i, i, j).powi(2);
            for k in 0..n {
                if k != i && k != j {
                    distinct += c.get(i, j, k).powi(2);
                }
            }
        }
    }
    Ok(0.5 * cross / a2 + 2.0 * pairs + distinct)
}

/// Which families of the equality-case system hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EqualityReport {
    /// `C_jji = 0` for `j ≠ i`.
    pub mixed_pairs_vanish: bool,
    /// `C_ijk = 0` for distinct indices.
    pub distinct_vanish: bool,
    /// `h_ii C_ssk = h_ss C_iik` for all `i, s, k`.
    pub proportional: bool,
    /// At most one index with `C_iii ≠ 0`.
    pub single_pure_direction: bool,
}

impl EqualityReport {
    pub fn all_hold(&self) -> bool {
        self.mixed_pairs_vanish && self.distinct_vanish && self.proportional
    }
}

pub fn equality_conditions(
    h: &DiagonalShape,
    c: &CubicSymTensor,
    tol: f64,
) -> Result<EqualityReport> {
    check_dims(h, c)?;
    let n = h.dim();
    let mut mixed = true;
    let mut distinct = true;
    let mut proportional = true;
    for i in 0..n {
        for j in 0..n {
            if i != j && c.get(j, j, i).abs() > tol {
                mixed = false;
            }
            for k in 0..n {
                if i != j && j != k && i != k && c.get(i, j, k).abs() > tol {
                    distinct = false;
                }
                // here j plays the role of s
                if (h.h[i] * c.get(j, j, k) - h.h[j] * c.get(i, i, k)).abs() > tol {
                    proportional = false;
                }
            }
        }
    }
    let pure = (0..n).filter(|&i| c.get(i, i, i).abs() > tol).count();
    Ok(EqualityReport {
        mixed_pairs_vanish: mixed,
        distinct_vanish: distinct,
        proportional,
        single_pure_direction: pure <= 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankClass {
    Flat,
    CylinderLike,
    Generic,
}

pub fn classify_rank(h: &DiagonalShape, tol: f64) -> RankClass {
    match h.values().iter().filter(|v| v.abs() > tol).count() {
        0 => RankClass::Flat,
        1 => RankClass::CylinderLike,
        _ => RankClass::Generic,
    }
}

/// `trace(A² P₁) = |√P₁ A|²`.
pub fn p1_contraction(a: &ShapeOperator) -> f64 {
    let m = a.matrix();
    let n = a.dim();
    let p1 = DMatrix::<f64>::identity(n, n) * m.trace() - m;
    (m * m * p1).trace()
}
