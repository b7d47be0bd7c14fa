//! Covariant derivative of the second fundamental form from exact jets, and
//! the residual of `L₁S₁ = |∇A|² − |∇S₁|² + S₁²S₂ + 3S₁S₃ − 4S₂² + ΔS₂`.

use rayon::prelude::*;
use serde::Serialize;

use super::field::{geometry_from_jets, ScalarField, ShapeField};
use super::jet::{self, Jet};
use super::ops::{l1_apply, EXCLUDED_RING};
use super::patch::{DerivativeOracle, SurfacePatch};
use crate::error::{Error, Result};
use crate::tensorid::{CubicSymTensor, DiagonalShape};

/// Covariant data at one point.
#[derive(Debug, Clone)]
pub struct CovariantPoint {
    /// `h_{ij;k}` in the principal frame.
    pub tensor: CubicSymTensor,
    /// Principal curvatures in the same frame.
    pub principal: DiagonalShape,
    pub norm_da_sq: f64,
    pub norm_grad_s1_sq: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    /// `Δ_g S₂`, only when requested.
    pub laplacian_s2: Option<f64>,
}

fn require_analytic(patch: &SurfacePatch) -> Result<()> {
    match patch.oracle() {
        DerivativeOracle::Analytic => Ok(()),
        DerivativeOracle::FiniteDifference { .. } => Err(Error::UnsupportedPrecision(
            "covariant derivatives of the shape operator need the analytic oracle".into(),
        )),
    }
}

/// Jet of the unit normal (order of `tangents`).
fn normal_jet(tangents: &[Vec<Jet>], hint: &[f64]) -> Result<Vec<Jet>> {
    let n = tangents.len();
    let mut normal = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let minor: Vec<Vec<Jet>> = (0..n)
            .map(|r| {
                let row = if r < k { r } else { r + 1 };
                (0..n).map(|i| tangents[i][row].clone()).collect()
            })
            .collect();
        let d = jet::det(&minor);
        normal.push(if k % 2 == 0 { d } else { -d });
    }
    let len = jet::dot(&normal, &normal).sqrt();
    if !(len.value() > 0.0 && len.value().is_finite()) {
        return Err(Error::NumericalFailure(
            "tangent vectors are linearly dependent".into(),
        ));
    }
    let flip = normal
        .iter()
        .zip(hint)
        .map(|(a, b)| a.value() * b)
        .sum::<f64>()
        < 0.0;
    let inv = if flip { -len.recip() } else { len.recip() };
    Ok(normal.iter().map(|c| c * &inv).collect())
}

pub fn covariant_at(
    patch: &SurfacePatch,
    x: &[f64],
    with_laplacian: bool,
) -> Result<CovariantPoint> {
    require_analytic(patch)?;
    let n = patch.dim();
    // geometry jets of order k need immersion jets of order k + 2
    let k = if with_laplacian { 2 } else { 1 };
    let xj = patch.embedding_jets(x, k + 2)?;
    let pg = geometry_from_jets(patch, x, &xj)?;

    let first: Vec<Vec<Jet>> = (0..n)
        .map(|i| xj.iter().map(|c| c.derivative(i)).collect())
        .collect();
    let tangents: Vec<Vec<Jet>> = first
        .iter()
        .map(|t| t.iter().map(|c| c.truncate(k)).collect())
        .collect();
    let g: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| jet::dot(&tangents[i], &tangents[j]))
                .collect()
        })
        .collect();
    let normal = normal_jet(&tangents, &patch.normal_hint(&pg.position))?;
    let b: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let xij: Vec<Jet> = first[i].iter().map(|c| c.derivative(j)).collect();
                    jet::dot(&xij, &normal)
                })
                .collect()
        })
        .collect();
    let g_inv = jet::inverse(&g)
        .ok_or_else(|| Error::NumericalFailure(format!("degenerate metric at {x:?}")))?;
    let a: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut acc = g_inv[i][0].constant_like(0.0);
                    for m in 0..n {
                        acc = &acc + &(&g_inv[i][m] * &b[m][j]);
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let mut s1 = a[0][0].constant_like(0.0);
    let mut tr_a2 = a[0][0].constant_like(0.0);
    for i in 0..n {
        s1 = &s1 + &a[i][i];
        for j in 0..n {
            tr_a2 = &tr_a2 + &(&a[i][j] * &a[j][i]);
        }
    }
    let s2 = (&(&s1 * &s1) - &tr_a2) * 0.5;

    let e = |i: usize| {
        let mut v = vec![0u8; n];
        v[i] = 1;
        v
    };
    let gi0: Vec<Vec<f64>> = g_inv
        .iter()
        .map(|r| r.iter().map(Jet::value).collect())
        .collect();
    // dg[l][i][k] = ∂_k g_li
    let dg: Vec<Vec<Vec<f64>>> = g
        .iter()
        .map(|r| {
            r.iter()
                .map(|gj| (0..n).map(|q| gj.partial(&e(q))).collect())
                .collect()
        })
        .collect();
    // gamma[m][k][i] = Γ^m_{ki}
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for m in 0..n {
        for kk in 0..n {
            for i in 0..n {
                gamma[m][kk][i] = 0.5
                    * (0..n)
                        .map(|l| gi0[m][l] * (dg[l][i][kk] + dg[l][kk][i] - dg[kk][i][l]))
                        .sum::<f64>();
            }
        }
    }
    let b0: Vec<Vec<f64>> = b
        .iter()
        .map(|r| r.iter().map(Jet::value).collect())
        .collect();
    let mut hcov = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for kk in 0..n {
                let mut v = b[i][j].partial(&e(kk));
                for m in 0..n {
                    v -= gamma[m][kk][i] * b0[m][j] + gamma[m][kk][j] * b0[i][m];
                }
                hcov[(i * n + j) * n + kk] = v;
            }
        }
    }
    let raise = |t: &[f64]| -> Vec<f64> {
        // all three indices raised with g⁻¹
        let mut out = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for kk in 0..n {
                    let mut v = 0.0;
                    for p in 0..n {
                        for q in 0..n {
                            for r in 0..n {
                                v += gi0[i][p] * gi0[j][q] * gi0[kk][r] * t[(p * n + q) * n + r];
                            }
                        }
                    }
                    out[(i * n + j) * n + kk] = v;
                }
            }
        }
        out
    };
    let norm_da_sq: f64 = raise(&hcov).iter().zip(&hcov).map(|(u, v)| u * v).sum();
    let ds1: Vec<f64> = (0..n).map(|q| s1.partial(&e(q))).collect();
    let norm_grad_s1_sq: f64 = (0..n)
        .map(|i| (0..n).map(|j| gi0[i][j] * ds1[i] * ds1[j]).sum::<f64>())
        .sum();

    let frame = &pg.frame;
    let mut c = vec![0.0; n * n * n];
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                let mut v = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        for kk in 0..n {
                            v += hcov[(i * n + j) * n + kk]
                                * frame[(i, p)]
                                * frame[(j, q)]
                                * frame[(kk, r)];
                        }
                    }
                }
                c[(p * n + q) * n + r] = v;
            }
        }
    }

    let laplacian_s2 = with_laplacian.then(|| {
        let ds2: Vec<f64> = (0..n).map(|q| s2.partial(&e(q))).collect();
        let mut lap = 0.0;
        for i in 0..n {
            for j in 0..n {
                let christ: f64 = (0..n).map(|m| gamma[m][i][j] * ds2[m]).sum();
                lap += gi0[i][j] * (s2.partial_along(&[i, j]) - christ);
            }
        }
        lap
    });

    Ok(CovariantPoint {
        tensor: CubicSymTensor::from_raw(n, c)?,
        principal: DiagonalShape::new(pg.principal.clone())?,
        norm_da_sq,
        norm_grad_s1_sq,
        s1: pg.s(1),
        s2: pg.s(2),
        s3: pg.s(3),
        laplacian_s2,
    })
}

/// Covariant data at every node of the field (`None` on invalid nodes).
pub fn covariant_da(field: &ShapeField) -> Result<Vec<Option<CovariantPoint>>> {
    require_analytic(field.patch())?;
    let grid = field.grid();
    let out: Vec<Result<Option<CovariantPoint>>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            if !field.is_valid(idx) {
                return Ok(None);
            }
            covariant_at(field.patch(), &grid.coords(idx), false).map(Some)
        })
        .collect();
    out.into_iter().collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityResidual {
    pub h: f64,
    pub sup_residual: f64,
    /// Max of `| |∇A|² − |∇S₁|² |` over the same nodes.
    pub max_norm_gap: f64,
    pub max_abs_s2: f64,
}

/// Sup-residual of `L₁S₁ − (|∇A|² − |∇S₁|² + 3S₁S₃)` on a patch with `S₂ ≡ 0`.
pub fn eqn16_residual(patch: &SurfacePatch, h: f64) -> Result<IdentityResidual> {
    require_analytic(patch)?;
    let field = ShapeField::build(patch, h)?;
    let (lo, hi) = field.s_range(2);
    let max_abs_s2 = lo.abs().max(hi.abs());
    let (s1_lo, s1_hi) = field.s_range(1);
    if max_abs_s2 > 1e-8 * (1.0 + s1_lo.abs().max(s1_hi.abs()).powi(2)) {
        return Err(Error::PreconditionViolation(format!(
            "identity requires S2 = 0 on the patch; observed S2 range [{lo}, {hi}]"
        )));
    }
    identity_residual(&field, false, max_abs_s2)
}

/// Sup-residual of the general identity
/// `L₁S₁ = |∇A|² − |∇S₁|² + S₁²S₂ + 3S₁S₃ − 4S₂² + ΔS₂`, valid for any
/// hypersurface of Euclidean space.
pub fn l1s1_identity_residual(patch: &SurfacePatch, h: f64) -> Result<IdentityResidual> {
    require_analytic(patch)?;
    let field = ShapeField::build(patch, h)?;
    let (lo, hi) = field.s_range(2);
    identity_residual(&field, true, lo.abs().max(hi.abs()))
}

fn identity_residual(
    field: &ShapeField,
    general: bool,
    max_abs_s2: f64,
) -> Result<IdentityResidual> {
    let grid = field.grid();
    let s1 = field.scalar(|f, idx| f.s(idx, 1));
    let l1 = l1_apply(field, &s1)?;
    let rows: Vec<Result<(f64, f64)>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            if grid.depth(idx) < EXCLUDED_RING.max(l1.margin()) {
                return Ok((0.0, 0.0));
            }
            let cp = covariant_at(field.patch(), &grid.coords(idx), general)?;
            let mut rhs = cp.norm_da_sq - cp.norm_grad_s1_sq + 3.0 * cp.s1 * cp.s3;
            if general {
                rhs += cp.s1 * cp.s1 * cp.s2 - 4.0 * cp.s2 * cp.s2 + cp.laplacian_s2.unwrap_or(0.0);
            }
            Ok((
                (l1.get(idx) - rhs).abs(),
                (cp.norm_da_sq - cp.norm_grad_s1_sq).abs(),
            ))
        })
        .collect();
    let mut sup: f64 = 0.0;
    let mut gap: f64 = 0.0;
    for r in rows {
        let (a, b) = r?;
        if !a.is_finite() {
            return Err(Error::NumericalFailure(
                "non-finite identity residual".into(),
            ));
        }
        sup = sup.max(a);
        gap = gap.max(b);
    }
    Ok(IdentityResidual {
        h: grid.h(),
        sup_residual: sup,
        max_norm_gap: gap,
        max_abs_s2,
    })
}

/// Per-node `|∇A|²` as a scalar field (NaN on invalid nodes).
pub fn norm_da_field(field: &ShapeField) -> Result<ScalarField> {
    let pts = covariant_da(field)?;
    Ok(ScalarField::new(
        pts.iter()
            .map(|p| p.as_ref().map_or(f64::NAN, |c| c.norm_da_sq))
            .collect(),
        0,
    ))
}
