//! Pointwise geometry of a patch and its sampling on a lattice.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use super::grid::Grid;
use super::jet::Jet;
use super::patch::SurfacePatch;
use crate::curvalg::{newton_operator, CurvatureVector, NewtonOperator, ShapeOperator};
use crate::error::{Error, Result};

/// Relative determinant below which a chart metric counts as degenerate.
const DEGENERATE_METRIC: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub x: Vec<f64>,
    pub position: Vec<f64>,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub det_g: f64,
    /// `√(1+|∇u|²)`; `None` for analytic charts.
    pub w: Option<f64>,
    pub normal: Vec<f64>,
    /// Covariant second fundamental form `b_ij = ⟨∂_ij X, N⟩`.
    pub b: DMatrix<f64>,
    /// Mixed-index shape operator `g⁻¹b` in coordinates.
    pub shape_mixed: DMatrix<f64>,
    /// Symmetric form `g^{-1/2} b g^{-1/2}` in an orthonormal frame.
    pub shape: ShapeOperator,
    /// Principal curvatures, ascending.
    pub principal: Vec<f64>,
    /// Columns are `g`-orthonormal principal directions in coordinates, in
    /// the order of `principal`.
    pub frame: DMatrix<f64>,
    pub curvatures: CurvatureVector,
    /// `S₁I − g⁻¹b` in coordinates.
    pub p1_mixed: DMatrix<f64>,
    pub p1: NewtonOperator,
}

impl PointGeometry {
    pub fn s(&self, r: usize) -> f64 {
        self.curvatures.s(r)
    }

    /// `⟨N, e_{n+1}⟩`.
    pub fn vertical_normal(&self) -> f64 {
        *self.normal.last().expect("normal has n+1 components")
    }

    /// Jacobi potential `S₁S₂ − 3S₃ + c(n−1)S₁`.
    pub fn potential(&self, c: f64) -> f64 {
        jacobi_potential(self.s(1), self.s(2), self.s(3), c, self.x.len())
    }
}

pub fn jacobi_potential(s1: f64, s2: f64, s3: f64, c: f64, n: usize) -> f64 {
    s1 * s2 - 3.0 * s3 + c * (n as f64 - 1.0) * s1
}

fn domain_slack(patch: &SurfacePatch) -> f64 {
    let c = patch.domain().center();
    1e-12 * (1.0 + c.iter().map(|v| v.abs()).fold(0.0, f64::max))
}

pub fn point_geometry(patch: &SurfacePatch, x: &[f64]) -> Result<PointGeometry> {
    if x.len() != patch.dim() || !patch.domain().contains(x, domain_slack(patch)) {
        return Err(Error::Domain(format!(
            "point {x:?} lies outside the patch domain"
        )));
    }
    let jets = patch.embedding_jets(x, 2)?;
    geometry_from_jets(patch, x, &jets)
}

pub(crate) fn unit_normal(tangents: &[Vec<f64>], hint: &[f64]) -> Result<Vec<f64>> {
    let n = tangents.len();
    let mut normal = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let minor = DMatrix::from_fn(n, n, |r, i| tangents[i][if r < k { r } else { r + 1 }]);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        normal.push(sign * minor.determinant());
    }
    let len = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(len > 0.0 && len.is_finite()) {
        return Err(Error::NumericalFailure(
            "tangent vectors are linearly dependent".into(),
        ));
    }
    let flip = normal.iter().zip(hint).map(|(a, b)| a * b).sum::<f64>() < 0.0;
    let s = if flip { -1.0 / len } else { 1.0 / len };
    Ok(normal.into_iter().map(|v| v * s).collect())
}

/// `g^{-1/2}` for a symmetric positive definite `g`.
pub(crate) fn inverse_sqrt(g: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(g.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

pub(crate) fn geometry_from_jets(
    patch: &SurfacePatch,
    x: &[f64],
    jets: &[Jet],
) -> Result<PointGeometry> {
    let n = patch.dim();
    let tangents: Vec<Vec<f64>> = (0..n)
        .map(|i| jets.iter().map(|j| j.partial_along(&[i])).collect())
        .collect();
    let second = |i: usize, j: usize| -> Vec<f64> {
        jets.iter().map(|jt| jt.partial_along(&[i, j])).collect()
    };
    let position: Vec<f64> = jets.iter().map(Jet::value).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();

    let g = DMatrix::from_fn(n, n, |i, j| dot(&tangents[i], &tangents[j]));
    let scale = g.trace() / n as f64;
    let det_g = g.determinant();
    if !(det_g > DEGENERATE_METRIC * scale.powi(n as i32)) || !det_g.is_finite() {
        return Err(Error::NumericalFailure(format!(
            "degenerate metric at {x:?} (det g = {det_g:e})"
        )));
    }
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NumericalFailure(format!("metric not invertible at {x:?}")))?;
    let normal = unit_normal(&tangents, &patch.normal_hint(&position))?;
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = dot(&second(i, j), &normal);
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }
    let g_mhalf = inverse_sqrt(&g);
    let shape = ShapeOperator::new(&g_mhalf * &b * &g_mhalf)?;
    let eig = SymmetricEigen::new(shape.matrix().clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[c]));
    let principal: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let u = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let frame = &g_mhalf * u;
    let curvatures = shape.curvatures();
    let shape_mixed = &g_inv * &b;
    let p1_mixed = DMatrix::identity(n, n) * curvatures.s(1) - &shape_mixed;
    let p1 = newton_operator(&shape, 1)?;
    let w = patch
        .is_graph()
        .then(|| (1.0 + tangents.iter().map(|t| t[n] * t[n]).sum::<f64>()).sqrt());
    Ok(PointGeometry {
        x: x.to_vec(),
        position,
        g,
        g_inv,
        det_g,
        w,
        normal,
        b,
        shape_mixed,
        shape,
        principal,
        frame,
        curvatures,
        p1_mixed,
        p1,
    })
}

/// Geometry sampled on the lattice of a box-domain patch.
///
/// Nodes where a chart degenerates (only allowed on the boundary) are
/// stored as NaN and reported invalid.
#[derive(Debug, Clone)]
pub struct ShapeField {
    patch: SurfacePatch,
    grid: Grid,
    stride: usize,
    data: Vec<f64>,
}

// record layout: g_inv (n²) | p1_mixed (n²) | √det g | W | ⟨N,e_{n+1}⟩ | S₁ S₂ S₃ | λ (n)
impl ShapeField {
    pub fn build(patch: &SurfacePatch, h: f64) -> Result<Self> {
        let grid = Grid::over(patch.domain(), h)?;
        let n = patch.dim();
        let stride = 2 * n * n + 6 + n;
        let mut data = vec![f64::NAN; grid.len() * stride];
        let outcomes: Vec<Result<()>> = data
            .par_chunks_mut(stride)
            .enumerate()
            .map(|(idx, rec)| {
                let x = grid.coords(idx);
                match point_geometry(patch, &x) {
                    Ok(pg) => {
                        write_record(&pg, n, rec);
                        Ok(())
                    }
                    Err(Error::NumericalFailure(_))
                        if !patch.is_graph() && grid.depth(idx) == 0 =>
                    {
                        Ok(())
                    }
                    Err(e) => Err(e),
                }
            })
            .collect();
        outcomes.into_iter().collect::<Result<Vec<()>>>()?;
        Ok(Self {
            patch: patch.clone(),
            grid,
            stride,
            data,
        })
    }

    pub fn patch(&self) -> &SurfacePatch {
        &self.patch
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    fn rec(&self, idx: usize) -> &[f64] {
        &self.data[idx * self.stride..(idx + 1) * self.stride]
    }

    fn n2(&self) -> usize {
        self.dim() * self.dim()
    }

    pub fn is_valid(&self, idx: usize) -> bool {
        !self.sqrt_det_g(idx).is_nan()
    }

    /// Row-major `g⁻¹` at node `idx`.
    pub fn g_inv(&self, idx: usize) -> &[f64] {
        &self.rec(idx)[..self.n2()]
    }

    /// Row-major `P₁` (mixed indices) at node `idx`.
    pub fn p1_mixed(&self, idx: usize) -> &[f64] {
        let n2 = self.n2();
        &self.rec(idx)[n2..2 * n2]
    }

    pub fn sqrt_det_g(&self, idx: usize) -> f64 {
        self.rec(idx)[2 * self.n2()]
    }

    /// NaN for charts.
    pub fn w(&self, idx: usize) -> f64 {
        self.rec(idx)[2 * self.n2() + 1]
    }

    pub fn vertical_normal(&self, idx: usize) -> f64 {
        self.rec(idx)[2 * self.n2() + 2]
    }

    pub fn s(&self, idx: usize, r: usize) -> f64 {
        assert!((1..=3).contains(&r), "only S1..S3 are stored per node");
        self.rec(idx)[2 * self.n2() + 2 + r]
    }

    pub fn principal(&self, idx: usize) -> &[f64] {
        &self.rec(idx)[2 * self.n2() + 6..]
    }

    pub fn potential(&self, idx: usize, c: f64) -> f64 {
        jacobi_potential(
            self.s(idx, 1),
            self.s(idx, 2),
            self.s(idx, 3),
            c,
            self.dim(),
        )
    }

    /// Full geometry at a node, recomputed from the patch.
    pub fn point(&self, idx: usize) -> Result<PointGeometry> {
        point_geometry(&self.patch, &self.grid.coords(idx))
    }

    /// Per-node scalar derived from the stored geometry.
    pub fn scalar(&self, f: impl Fn(&Self, usize) -> f64 + Sync) -> ScalarField {
        let values = (0..self.grid.len())
            .into_par_iter()
            .map(|idx| {
                if self.is_valid(idx) {
                    f(self, idx)
                } else {
                    f64::NAN
                }
            })
            .collect();
        ScalarField::new(values, 0)
    }

    /// `(min, max)` of `S_r` over valid nodes.
    pub fn s_range(&self, r: usize) -> (f64, f64) {
        (0..self.grid.len())
            .filter(|&i| self.is_valid(i))
            .map(|i| self.s(i, r))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// CSV with columns `x1..xn, W, S1, S2, S3, lambda_1..lambda_n`; invalid
    /// nodes are omitted.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        let n = self.dim();
        let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        header.extend(["W", "S1", "S2", "S3"].map(String::from));
        header.extend((1..=n).map(|i| format!("lambda_{i}")));
        writeln!(out, "{}", header.join(","))?;
        for idx in (0..self.grid.len()).filter(|&i| self.is_valid(i)) {
            let mut row: Vec<String> = self
                .grid
                .coords(idx)
                .iter()
                .map(|v| v.to_string())
                .collect();
            row.push(self.w(idx).to_string());
            for r in 1..=3 {
                row.push(self.s(idx, r).to_string());
            }
            row.extend(self.principal(idx).iter().map(|v| v.to_string()));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn write_record(pg: &PointGeometry, n: usize, rec: &mut [f64]) {
    let n2 = n * n;
    for i in 0..n {
        for j in 0..n {
            rec[i * n + j] = pg.g_inv[(i, j)];
            rec[n2 + i * n + j] = pg.p1_mixed[(i, j)];
        }
    }
    rec[2 * n2] = pg.det_g.sqrt();
    rec[2 * n2 + 1] = pg.w.unwrap_or(f64::NAN);
    rec[2 * n2 + 2] = pg.vertical_normal();
    for r in 1..=3 {
        rec[2 * n2 + 2 + r] = pg.s(r);
    }
    rec[2 * n2 + 6..].copy_from_slice(&pg.principal);
}

/// Node values on a lattice; nodes closer than `margin` to the boundary are
/// invalid (NaN).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
    margin: usize,
}

impl ScalarField {
    pub fn new(values: Vec<f64>, margin: usize) -> Self {
        Self { values, margin }
    }

    /// Samples `f` at every node.
    pub fn sample(grid: &Grid, f: impl Fn(&[f64]) -> f64 + Sync) -> Self {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(&grid.coords(i)))
            .collect();
        Self::new(values, 0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Max of `|v|` over nodes at depth `≥ exclude`; NaN if any of them is
    /// not finite.
    pub fn sup_norm(&self, grid: &Grid, exclude: usize) -> f64 {
        let mut sup: f64 = 0.0;
        for (idx, v) in self.values.iter().enumerate() {
            if grid.depth(idx) < exclude.max(self.margin) {
                continue;
            }
            if !v.is_finite() {
                return f64::NAN;
            }
            sup = sup.max(v.abs());
        }
        sup
    }

    /// Pointwise combination; the result inherits the larger margin.
    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| f(*a, *b))
            .collect();
        ScalarField::new(values, self.margin.max(other.margin))
    }
}
