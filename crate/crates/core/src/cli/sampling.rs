//! Seeded random inputs for the algebraic suites.

use nalgebra::DMatrix;
use rand::Rng;

use crate::tensorid::{CubicSymTensor, DiagonalShape};

/// Symmetric matrix with entries uniform in `[-1, 1]`.
pub fn symmetric_matrix(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = rng.gen_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Spectrum uniform in `[-s, s]` with `s = 10^u`, `u` uniform in `[-2, 2]`.
pub fn spectrum(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
    (0..n).map(|_| scale * rng.gen_range(-1.0..1.0)).collect()
}

/// Diagonal second fundamental form with `|A| ≥ min_norm` and a random
/// symmetric third-order tensor.
pub fn shape_and_tensor(
    rng: &mut impl Rng,
    n: usize,
    min_norm: f64,
) -> (DiagonalShape, CubicSymTensor) {
    let h = loop {
        let h: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if h.iter().map(|v| v * v).sum::<f64>().sqrt() >= min_norm {
            break h;
        }
    };
    let raw = (0..n * n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    (
        DiagonalShape::new(h).expect("finite diagonal"),
        CubicSymTensor::from_raw(n, raw).expect("consistent size"),
    )
}

/// Uniform points of `[lo + margin, hi − margin]` per axis.
pub fn box_points(
    rng: &mut impl Rng,
    lo: &[f64],
    hi: &[f64],
    margin: f64,
    count: usize,
) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            lo.iter()
                .zip(hi)
                .map(|(a, b)| rng.gen_range(a + margin..=b - margin))
                .collect()
        })
        .collect()
}
