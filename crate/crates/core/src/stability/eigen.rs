//! Lowest eigenvalues and inertia of the pencil `(A, M)` with `M` positive
//! definite, optionally restricted to the hyperplane `cᵀx = 0`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::sparse::{BandLdlt, SparseSym};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Cholesky reduction and a full symmetric eigendecomposition.
    Dense,
    /// Banded `LDLᵀ` inertia counts plus shift-invert subspace iteration.
    BandedShiftInvert,
}

#[derive(Debug, Clone, Serialize)]
pub struct PencilSpectrum {
    /// Ascending; every eigenvalue for the dense solver, the lowest few
    /// otherwise.
    pub eigenvalues: Vec<f64>,
    pub complete: bool,
    /// Number of eigenvalues below `−tol`.
    pub neg_count: usize,
    pub solver: SolverKind,
    pub factorizations: usize,
    pub iterations: usize,
    /// Shift used for the inverse iteration (banded solver only).
    pub shift: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Problems up to this size use the dense solver.
    pub dense_limit: usize,
    /// Eigenvalues to resolve in the iterative solver.
    pub want: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            dense_limit: 1200,
            want: 4,
            max_iterations: 400,
            seed: 0x5eed,
        }
    }
}

pub fn pencil_spectrum(
    a: &SparseSym,
    m: &SparseSym,
    constraint: Option<&[f64]>,
    tol: f64,
    opts: &EigenOptions,
) -> Result<PencilSpectrum> {
    let free = a.dim() - usize::from(constraint.is_some());
    if free == 0 {
        return Err(Error::InvalidInput(
            "eigenproblem has no free directions".into(),
        ));
    }
    if a.dim() <= opts.dense_limit {
        dense(a, m, constraint, tol)
    } else {
        banded(a, m, constraint, tol, opts)
    }
}

fn dense(
    a: &SparseSym,
    m: &SparseSym,
    constraint: Option<&[f64]>,
    tol: f64,
) -> Result<PencilSpectrum> {
    let chol = m
        .to_dense()
        .cholesky()
        .ok_or_else(|| Error::NumericalFailure("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NumericalFailure("mass Cholesky factor is singular".into()))?;
    let mut c = &linv * a.to_dense() * linv.transpose();
    c = (&c + c.transpose()) * 0.5;
    if let Some(con) = constraint {
        // x = L⁻ᵀy, so cᵀx = 0 becomes dᵀy = 0 with d = L⁻¹c
        let d = &linv * DVector::from_column_slice(con);
        let basis = orthogonal_complement(&d)?;
        c = basis.transpose() * c * &basis;
        c = (&c + c.transpose()) * 0.5;
    }
    let eig = SymmetricEigen::try_new(c, 1e-14, 10_000).ok_or_else(|| {
        Error::NumericalFailure("dense symmetric eigensolver did not converge".into())
    })?;
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let neg_count = ev.iter().filter(|&&v| v < -tol).count();
    Ok(PencilSpectrum {
        eigenvalues: ev,
        complete: true,
        neg_count,
        solver: SolverKind::Dense,
        factorizations: 1,
        iterations: 0,
        shift: None,
    })
}

/// Orthonormal basis of `d⊥` from a Householder reflection.
fn orthogonal_complement(d: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = d.len();
    let norm = d.norm();
    if !(norm > 0.0) {
        return Err(Error::InvalidInput(
            "volume constraint vector vanishes".into(),
        ));
    }
    let mut v = d / norm;
    let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
    v[0] += sign;
    let vv = v.norm_squared();
    let h = DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / vv);
    Ok(h.columns(1, n - 1).into_owned())
}

struct ShiftedSolver<'a> {
    a: &'a SparseSym,
    m: &'a SparseSym,
    constraint: Option<&'a [f64]>,
    factorizations: usize,
}

struct Factored {
    ldlt: BandLdlt,
    // (A − σM)⁻¹c and cᵀ(A − σM)⁻¹c for the bordered system
    border: Option<(Vec<f64>, f64)>,
}

impl<'a> ShiftedSolver<'a> {
    fn factor(&mut self, shift: f64) -> Result<Factored> {
        self.factorizations += 1;
        let ldlt = match BandLdlt::factor(self.a, -shift, self.m) {
            Ok(f) => f,
            Err(_) => {
                // shift landed on a near-singular pivot; nudge it once
                self.factorizations += 1;
                let nudged = shift - 1e-7 * (1.0 + shift.abs());
                BandLdlt::factor(self.a, -nudged, self.m)?
            }
        };
        let border = self.constraint.map(|c| {
            let w = ldlt.solve(c);
            let cw: f64 = c.iter().zip(&w).map(|(x, y)| x * y).sum();
            (w, cw)
        });
        Ok(Factored { ldlt, border })
    }

    /// Eigenvalues below `shift` (in the constrained space if any).
    fn count_below(&mut self, shift: f64) -> Result<usize> {
        Ok(self.factor(shift)?.count())
    }
}

impl Factored {
    fn count(&self) -> usize {
        let neg = self.ldlt.negative_pivots();
        match self.border {
            // inertia of the bordered matrix = inertia of A − σM plus the Schur
            // complement −cᵀ(A − σM)⁻¹c; the border itself adds one negative
            Some((_, cw)) => (neg + usize::from(-cw < 0.0)).saturating_sub(1),
            None => neg,
        }
    }

    /// Solves `(A − σM)x = b` subject to `cᵀx = 0` when constrained.
    fn solve(&self, b: &[f64], constraint: Option<&[f64]>) -> Vec<f64> {
        let y = self.ldlt.solve(b);
        match (&self.border, constraint) {
            (Some((w, cw)), Some(c)) => {
                let cy: f64 = c.iter().zip(&y).map(|(p, q)| p * q).sum();
                let lam = cy / cw;
                y.iter().zip(w).map(|(p, q)| p - lam * q).collect()
            }
            _ => y,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project(x: &mut [f64], constraint: Option<&[f64]>) {
    if let Some(c) = constraint {
        let s = dot(c, x) / dot(c, c);
        x.iter_mut().zip(c).for_each(|(v, ci)| *v -= s * ci);
    }
}

fn banded(
    a: &SparseSym,
    m: &SparseSym,
    constraint: Option<&[f64]>,
    tol: f64,
    opts: &EigenOptions,
) -> Result<PencilSpectrum> {
    let dim = a.dim();
    let mut solver = ShiftedSolver {
        a,
        m,
        constraint,
        factorizations: 0,
    };
    let neg_count = solver.count_below(-tol)?;

    // upper bound for μ₁ from the Rayleigh quotient of a few smooth vectors
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let p = (opts.want + 4).min(dim - usize::from(constraint.is_some()));
    let mut block: Vec<Vec<f64>> = (0..p)
        .map(|_| {
            let mut x: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.5..1.5)).collect();
            project(&mut x, constraint);
            x
        })
        .collect();
    let rq = |x: &[f64]| a.quad_form(x) / m.quad_form(x);
    let mut hi = block.iter().map(|x| rq(x)).fold(f64::INFINITY, f64::min);
    let scale = 1.0 + a.norm_inf() / m.norm_inf();
    hi += 1e-9 * scale;
    let mut lo = hi.min(0.0) - 1.0;
    let mut step = 1.0f64.max(hi.abs());
    while solver.count_below(lo)? > 0 {
        step *= 4.0;
        lo = hi.min(0.0) - step;
        if step > 1e12 * scale {
            return Err(Error::NumericalFailure(format!(
                "no lower bound for the spectrum found (last shift {lo:e})"
            )));
        }
    }
    for _ in 0..6 {
        if hi - lo <= 0.05 * (1.0 + hi.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if solver.count_below(mid)? == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let shift = lo - 1e-3 * (1.0 + lo.abs());
    let fact = solver.factor(shift)?;
    if fact.count() != 0 {
        return Err(Error::NumericalFailure(format!(
            "shift {shift:e} is not below the spectrum"
        )));
    }

    let mut theta_old = vec![f64::INFINITY; opts.want.min(p)];
    let mut iterations = 0;
    let mut ritz = Vec::new();
    for it in 0..opts.max_iterations {
        iterations = it + 1;
        let y: Vec<Vec<f64>> = block
            .iter()
            .map(|x| fact.solve(&m.mul_vec(x), constraint))
            .collect();
        let ay: Vec<Vec<f64>> = y.iter().map(|v| a.mul_vec(v)).collect();
        let my: Vec<Vec<f64>> = y.iter().map(|v| m.mul_vec(v)).collect();
        let as_ = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&y[i], &ay[j]) + dot(&y[j], &ay[i])));
        let ms = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&y[i], &my[j]) + dot(&y[j], &my[i])));
        let chol = ms
            .cholesky()
            .ok_or_else(|| Error::NumericalFailure("Ritz basis lost linear independence".into()))?;
        let linv = chol
            .l()
            .try_inverse()
            .ok_or_else(|| Error::NumericalFailure("singular Ritz mass".into()))?;
        let c = &linv * as_ * linv.transpose();
        let eig = SymmetricEigen::new((&c + c.transpose()) * 0.5);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let coeff = linv.transpose() * &eig.eigenvectors;
        block = order
            .iter()
            .map(|&k| {
                let mut x = vec![0.0; dim];
                for (j, yj) in y.iter().enumerate() {
                    let s = coeff[(j, k)];
                    x.iter_mut().zip(yj).for_each(|(v, w)| *v += s * w);
                }
                x
            })
            .collect();
        ritz = order
            .iter()
            .map(|&k| eig.eigenvalues[k])
            .collect::<Vec<f64>>();
        let converged = theta_old
            .iter()
            .zip(&ritz)
            .all(|(o, n)| (o - n).abs() <= 1e-12 * (scale + n.abs()));
        theta_old = ritz[..theta_old.len()].to_vec();
        if converged {
            break;
        }
    }
    ritz.truncate(opts.want.min(p));
    Ok(PencilSpectrum {
        eigenvalues: ritz,
        complete: false,
        neg_count,
        solver: SolverKind::BandedShiftInvert,
        factorizations: solver.factorizations,
        iterations,
        shift: Some(shift),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 1D Dirichlet Laplacian minus a constant potential, lumped mass.
    fn laplacian(dim: usize, pot: f64) -> (SparseSym, SparseSym) {
        let h = 1.0 / (dim + 1) as f64;
        let mut ta = Vec::new();
        let mut tm = Vec::new();
        for i in 0..dim {
            ta.push((i, i, 2.0 / h - pot * h));
            tm.push((i, i, h));
            if i + 1 < dim {
                ta.push((i, i + 1, -1.0 / h));
                ta.push((i + 1, i, -1.0 / h));
            }
        }
        (
            SparseSym::from_triplets(dim, ta),
            SparseSym::from_triplets(dim, tm),
        )
    }

    #[test]
    fn dense_and_banded_agree() {
        let (a, m) = laplacian(300, 30.0);
        let d = pencil_spectrum(
            &a,
            &m,
            None,
            1e-8,
            &EigenOptions {
                dense_limit: 1000,
                ..Default::default()
            },
        )
        .unwrap();
        let b = pencil_spectrum(
            &a,
            &m,
            None,
            1e-8,
            &EigenOptions {
                dense_limit: 10,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(d.neg_count, b.neg_count);
        assert_eq!(d.neg_count, 1); // π² < 30 < 4π²
        for (x, y) in d.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).abs() < 1e-7 * (1.0 + x.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn constrained_modes_agree() {
        let (a, m) = laplacian(200, 30.0);
        let c: Vec<f64> = m.mul_vec(&vec![1.0; 200]);
        let d = pencil_spectrum(
            &a,
            &m,
            Some(&c),
            1e-8,
            &EigenOptions {
                dense_limit: 1000,
                ..Default::default()
            },
        )
        .unwrap();
        let b = pencil_spectrum(
            &a,
            &m,
            Some(&c),
            1e-8,
            &EigenOptions {
                dense_limit: 10,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(d.eigenvalues.len(), 199);
        // the even first mode is removed by the constraint
        assert_eq!(d.neg_count, 0);
        assert_eq!(b.neg_count, 0);
        for (x, y) in d.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).abs() < 1e-7 * (1.0 + x.abs()), "{x} vs {y}");
        }
    }
}
