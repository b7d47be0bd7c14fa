//! Differential operators on lattice fields and the pointwise PDE residuals
//! built from them.

use rayon::prelude::*;
use serde::Serialize;

use super::field::{ScalarField, ShapeField};
use super::patch::SurfacePatch;
use crate::error::{invalid, Error, Result};

/// Width of the boundary ring left out of every sup-norm.
pub const EXCLUDED_RING: usize = 2;

/// Contravariant vector field on a lattice, `n` components per node.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    n: usize,
    values: Vec<f64>,
    margin: usize,
}

impl VectorField {
    pub fn new(n: usize, values: Vec<f64>, margin: usize) -> Self {
        assert_eq!(
            values.len() % n,
            0,
            "vector field length must be a multiple of n"
        );
        Self { n, values, margin }
    }

    /// Samples `f` (returning `n` components) at every node.
    pub fn sample(field: &ShapeField, f: impl Fn(&[f64]) -> Vec<f64> + Sync) -> Self {
        let grid = field.grid();
        let n = grid.dim();
        let values: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                let v = f(&grid.coords(i));
                assert_eq!(v.len(), n, "vector sample has wrong length");
                v
            })
            .collect();
        Self::new(n, values, 0)
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn at(&self, idx: usize) -> &[f64] {
        &self.values[idx * self.n..(idx + 1) * self.n]
    }
}

fn check_len(field: &ShapeField, len: usize) -> Result<()> {
    field.grid().require_min_points()?;
    if len != field.grid().len() {
        return invalid(format!(
            "field has {len} nodes, grid has {}",
            field.grid().len()
        ));
    }
    Ok(())
}

/// `(1/√g) ∂_i(√g Xⁱ)` by central differences.
pub fn intrinsic_div(field: &ShapeField, x: &VectorField) -> Result<ScalarField> {
    check_len(field, x.values.len() / x.n.max(1))?;
    let grid = field.grid();
    let n = grid.dim();
    let margin = x.margin + 1;
    let two_h = 2.0 * grid.h();
    let values = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            if grid.depth(idx) < margin {
                return f64::NAN;
            }
            let mut acc = 0.0;
            for axis in 0..n {
                let s = grid.stride(axis);
                let up = field.sqrt_det_g(idx + s) * x.at(idx + s)[axis];
                let down = field.sqrt_det_g(idx - s) * x.at(idx - s)[axis];
                acc += (up - down) / two_h;
            }
            acc / field.sqrt_det_g(idx)
        })
        .collect();
    Ok(ScalarField::new(values, margin))
}

/// Coordinate gradient `∂_k f` by central differences, then `M·df` with a
/// per-node row-major matrix `M`.
fn transformed_gradient(
    field: &ShapeField,
    f: &ScalarField,
    matrix: impl Fn(usize) -> Vec<f64> + Sync,
) -> Result<VectorField> {
    check_len(field, f.len())?;
    let grid = field.grid();
    let n = grid.dim();
    let margin = f.margin() + 1;
    let two_h = 2.0 * grid.h();
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .flat_map_iter(|idx| {
            if grid.depth(idx) < margin {
                return vec![f64::NAN; n];
            }
            let df: Vec<f64> = (0..n)
                .map(|axis| {
                    let s = grid.stride(axis);
                    (f.get(idx + s) - f.get(idx - s)) / two_h
                })
                .collect();
            let m = matrix(idx);
            (0..n)
                .map(|i| (0..n).map(|k| m[i * n + k] * df[k]).sum())
                .collect()
        })
        .collect();
    Ok(VectorField::new(n, values, margin))
}

/// Intrinsic gradient `g⁻¹ df`.
pub fn gradient(field: &ShapeField, f: &ScalarField) -> Result<VectorField> {
    transformed_gradient(field, f, |idx| field.g_inv(idx).to_vec())
}

/// `L₁f = div(P₁∇f)`.
pub fn l1_apply(field: &ShapeField, f: &ScalarField) -> Result<ScalarField> {
    let n = field.dim();
    let flux = transformed_gradient(field, f, |idx| {
        let p = field.p1_mixed(idx);
        let gi = field.g_inv(idx);
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                m[i * n + k] = (0..n).map(|j| p[i * n + j] * gi[j * n + k]).sum();
            }
        }
        m
    })?;
    intrinsic_div(field, &flux)
}

/// `T₁f = L₁f + (S₁S₂ − 3S₃ + c(n−1)S₁) f`.
pub fn jacobi_apply(field: &ShapeField, f: &ScalarField, c: f64) -> Result<ScalarField> {
    let l1 = l1_apply(field, f)?;
    let values = (0..l1.len())
        .map(|idx| l1.get(idx) + field.potential(idx, c) * f.get(idx))
        .collect();
    Ok(ScalarField::new(values, l1.margin()))
}

/// Ambient central-difference divergence of `∇u/W` at `x` (graphs only).
pub fn s1_divform(patch: &SurfacePatch, x: &[f64], step: f64) -> Result<f64> {
    if !patch.is_graph() {
        return invalid("s1_divform needs a graph patch");
    }
    if !(step > 0.0 && step.is_finite()) {
        return invalid(format!("step must be positive, got {step}"));
    }
    let n = patch.dim();
    let flux = |y: &[f64], axis: usize| -> Result<f64> {
        if !patch.domain().contains(y, 0.0) {
            return Err(Error::Domain(format!(
                "stencil point {y:?} leaves the domain"
            )));
        }
        let jets = patch.embedding_jets(y, 1)?;
        let grad: Vec<f64> = (0..n).map(|i| jets[n].partial_along(&[i])).collect();
        let w = (1.0 + grad.iter().map(|v| v * v).sum::<f64>()).sqrt();
        Ok(grad[axis] / w)
    };
    let mut acc = 0.0;
    for axis in 0..n {
        let mut up = x.to_vec();
        let mut down = x.to_vec();
        up[axis] += step;
        down[axis] -= step;
        acc += (flux(&up, axis)? - flux(&down, axis)?) / (2.0 * step);
    }
    Ok(acc)
}

#[derive(Debug, Clone, Serialize)]
pub struct ReillyReport {
    pub h: f64,
    /// Sup of `|T₁⟨N, e_{n+1}⟩|` (`c = 0`) away from the boundary layer.
    pub sup_residual: f64,
    pub excluded_width: f64,
    pub s2_min: f64,
    pub s2_max: f64,
}

/// Node depth that leaves out a boundary layer of physical width `ring`
/// (never less than [`EXCLUDED_RING`] nodes).
pub fn exclusion_depth(h: f64, ring: f64) -> usize {
    ((ring / h - 1e-9).ceil().max(0.0) as usize).max(EXCLUDED_RING)
}

/// Residual of `T₁(1/W) = 0` (with `c = 0`) on a patch of constant `S₂`.
pub fn reilly_residual(patch: &SurfacePatch, h: f64) -> Result<ReillyReport> {
    reilly_residual_excluding(patch, h, 0.0)
}

/// As [`reilly_residual`], with the sup taken away from a boundary layer of
/// physical width `ring`. Refinement studies hold `ring` fixed so every level
/// is measured on the same region.
pub fn reilly_residual_excluding(patch: &SurfacePatch, h: f64, ring: f64) -> Result<ReillyReport> {
    let field = ShapeField::build(patch, h)?;
    reilly_residual_on(&field, ring)
}

pub fn reilly_residual_on(field: &ShapeField, ring: f64) -> Result<ReillyReport> {
    let (s2_min, s2_max) = field.s_range(2);
    let scale = 1.0 + s2_min.abs().max(s2_max.abs());
    if !(s2_max - s2_min <= 1e-6 * scale) {
        return Err(Error::PreconditionViolation(format!(
            "S2 is not constant on the patch: observed range [{s2_min}, {s2_max}]"
        )));
    }
    let f = field.scalar(|fd, idx| fd.vertical_normal(idx));
    let t = jacobi_apply(field, &f, 0.0)?;
    let sup = t.sup_norm(field.grid(), exclusion_depth(field.grid().h(), ring));
    if !sup.is_finite() {
        return Err(Error::NumericalFailure("non-finite Jacobi residual".into()));
    }
    Ok(ReillyReport {
        h: field.grid().h(),
        sup_residual: sup,
        excluded_width: exclusion_depth(field.grid().h(), ring) as f64 * field.grid().h(),
        s2_min,
        s2_max,
    })
}
