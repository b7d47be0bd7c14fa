//! Multilinear finite elements for the second variation
//! `Q₁(f) = ∫⟨P₁∇f, ∇f⟩ dM − ∫(S₁S₂ − 3S₃ + c(n−1)S₁) f² dM`.
//!
//! Coefficients are frozen at each cell midpoint; products of basis functions
//! are then integrated exactly over the cell. One-point quadrature of the
//! gradients would admit hourglass modes with spurious negative energy.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eigen::{pencil_spectrum, EigenOptions, PencilSpectrum, SolverKind};
use super::sparse::SparseSym;
use crate::error::{invalid, Result};
use crate::graphgeo::field::{point_geometry, PointGeometry, ScalarField, ShapeField};
use crate::graphgeo::grid::Grid;
use crate::graphgeo::patch::SurfacePatch;

/// Exact integrals of products of multilinear basis functions on one cell.
#[derive(Debug, Clone)]
pub struct ElementBasis {
    n: usize,
    corners: usize,
    mass: Vec<f64>,
    // grad[(i·n + j)·m² + a·m + b] = ∫ ∂_iφ_a ∂_jφ_b
    grad: Vec<f64>,
}

impl ElementBasis {
    pub fn new(n: usize, h: f64) -> Self {
        let m = 1usize << n;
        let bit = |a: usize, d: usize| a >> d & 1;
        let m1 = |a: usize, b: usize| if a == b { h / 3.0 } else { h / 6.0 };
        let d1 = |a: usize, b: usize| if a == b { 1.0 / h } else { -1.0 / h };
        // ∫ φ_a′ φ_b over one interval
        let c1 = |a: usize, _b: usize| if a == 1 { 0.5 } else { -0.5 };
        let mut mass = vec![0.0; m * m];
        let mut grad = vec![0.0; n * n * m * m];
        for a in 0..m {
            for b in 0..m {
                mass[a * m + b] = (0..n).map(|d| m1(bit(a, d), bit(b, d))).product();
                for i in 0..n {
                    for j in 0..n {
                        let v: f64 = (0..n)
                            .map(|d| {
                                let (ad, bd) = (bit(a, d), bit(b, d));
                                if i == j && d == i {
                                    d1(ad, bd)
                                } else if d == i {
                                    c1(ad, bd)
                                } else if d == j {
                                    c1(bd, ad)
                                } else {
                                    m1(ad, bd)
                                }
                            })
                            .product();
                        grad[(i * n + j) * m * m + a * m + b] = v;
                    }
                }
            }
        }
        Self {
            n,
            corners: m,
            mass,
            grad,
        }
    }

    pub fn corners(&self) -> usize {
        self.corners
    }

    /// Element matrix `Σ_ij K_ij ∫∂_iφ_a∂_jφ_b + w ∫φ_aφ_b` (row-major).
    pub fn element(&self, k: &[f64], w: f64) -> Vec<f64> {
        let mm = self.corners * self.corners;
        let mut out: Vec<f64> = self.mass.iter().map(|v| w * v).collect();
        for ij in 0..self.n * self.n {
            let kij = k[ij];
            if kij != 0.0 {
                let g = &self.grad[ij * mm..(ij + 1) * mm];
                out.iter_mut().zip(g).for_each(|(o, v)| *o += kij * v);
            }
        }
        out
    }
}

/// Frozen coefficients of one cell.
#[derive(Debug, Clone)]
pub struct CellCoefficients {
    /// `(S₁g⁻¹ − g⁻¹bg⁻¹)√g`, row-major.
    pub stiffness: Vec<f64>,
    /// `(S₁S₂ − 3S₃ + c(n−1)S₁)√g`.
    pub potential: f64,
    /// `√g`.
    pub mass: f64,
}

fn cell_geometry(patch: &SurfacePatch, grid: &Grid) -> Result<Vec<PointGeometry>> {
    let out: Vec<Result<PointGeometry>> = (0..grid.cell_count())
        .into_par_iter()
        .map(|c| point_geometry(patch, &grid.cell_center(grid.cell_origin(c))))
        .collect();
    out.into_iter().collect()
}

/// Coefficients `(stiffness, mass-weight)` produced from cell geometry.
fn cell_forms(
    cells: &[PointGeometry],
    form: impl Fn(&PointGeometry) -> (Vec<f64>, f64) + Sync + Send,
) -> Vec<(Vec<f64>, f64)> {
    cells.par_iter().map(|pg| form(pg)).collect()
}

pub fn q1_coefficients(pg: &PointGeometry, c: f64) -> CellCoefficients {
    let n = pg.x.len();
    let sg = pg.det_g.sqrt();
    let m = &pg.p1_mixed * &pg.g_inv;
    let stiffness = (0..n * n)
        .map(|ij| {
            let (i, j) = (ij / n, ij % n);
            0.5 * (m[(i, j)] + m[(j, i)]) * sg
        })
        .collect();
    CellCoefficients {
        stiffness,
        potential: pg.potential(c) * sg,
        mass: sg,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Compactly supported variations: zero on the outer node layer.
    Dirichlet,
    /// Additionally `∫ f dM = 0`.
    VolumeConstrained,
}

#[derive(Debug, Clone)]
pub struct IndexOptions {
    pub mode: BoundaryMode,
    pub eigen: EigenOptions,
}

impl Default for IndexOptions {
    fn default() -> Self {
        Self {
            mode: BoundaryMode::Dirichlet,
            eigen: EigenOptions::default(),
        }
    }
}

/// Assembled second variation and its spectrum relative to the mass matrix.
#[derive(Debug, Clone)]
pub struct StabilityAssembly {
    pub grid: Grid,
    pub c: f64,
    pub mode: BoundaryMode,
    /// Lattice node of each unknown.
    pub dof_nodes: Vec<usize>,
    pub stiffness: SparseSym,
    pub potential: SparseSym,
    pub mass: SparseSym,
    pub spectrum: PencilSpectrum,
    pub tol_eig: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssemblySummary {
    pub h: f64,
    pub c: f64,
    pub mode: BoundaryMode,
    pub dofs: usize,
    pub nnz: usize,
    pub bandwidth: usize,
    pub neg_count: usize,
    pub mu_min: f64,
    pub eigenvalues: Vec<f64>,
    pub eigenvalues_complete: bool,
    pub tol_eig: f64,
    pub solver: SolverKind,
    pub factorizations: usize,
    pub iterations: usize,
}

impl StabilityAssembly {
    pub fn neg_count(&self) -> usize {
        self.spectrum.neg_count
    }

    pub fn mu_min(&self) -> f64 {
        self.spectrum.eigenvalues[0]
    }

    /// `xᵀ(K − V)x` for a vector over the unknowns.
    pub fn energy(&self, x: &[f64]) -> f64 {
        self.stiffness.quad_form(x) - self.potential.quad_form(x)
    }

    pub fn summary(&self) -> AssemblySummary {
        AssemblySummary {
            h: self.grid.h(),
            c: self.c,
            mode: self.mode,
            dofs: self.dof_nodes.len(),
            nnz: self.stiffness.nnz(),
            bandwidth: self.stiffness.bandwidth(),
            neg_count: self.neg_count(),
            mu_min: self.mu_min(),
            eigenvalues: self.spectrum.eigenvalues.clone(),
            eigenvalues_complete: self.spectrum.complete,
            tol_eig: self.tol_eig,
            solver: self.spectrum.solver,
            factorizations: self.spectrum.factorizations,
            iterations: self.spectrum.iterations,
        }
    }
}

/// Assembles `K`, `V`, `M` over interior nodes and counts the eigenvalues of
/// `(K − V)x = μMx` below `−tol_eig`, `tol_eig = 1e-8·(1 + (‖K‖∞ + ‖V‖∞)/‖M‖∞)`.
pub fn index_estimate(
    field: &ShapeField,
    c: f64,
    opts: &IndexOptions,
) -> Result<StabilityAssembly> {
    let grid = field.grid().clone();
    let n = grid.dim();
    let mut dof_of = vec![usize::MAX; grid.len()];
    let mut dof_nodes = Vec::new();
    for idx in 0..grid.len() {
        if grid.depth(idx) >= 1 {
            dof_of[idx] = dof_nodes.len();
            dof_nodes.push(idx);
        }
    }
    if dof_nodes.is_empty() {
        return invalid("grid has no interior nodes");
    }
    let cells = cell_geometry(field.patch(), &grid)?;
    let basis = ElementBasis::new(n, grid.h());
    let zero = vec![0.0; n * n];
    let elems: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = cells
        .par_iter()
        .map(|pg| {
            let cc = q1_coefficients(pg, c);
            (
                basis.element(&cc.stiffness, 0.0),
                basis.element(&zero, cc.potential),
                basis.element(&zero, cc.mass),
            )
        })
        .collect();
    let m = basis.corners();
    let (mut tk, mut tv, mut tm) = (Vec::new(), Vec::new(), Vec::new());
    for (cell, (ek, ev, em)) in elems.iter().enumerate() {
        let corners = grid.cell_corners(grid.cell_origin(cell));
        for a in 0..m {
            let ra = dof_of[corners[a]];
            if ra == usize::MAX {
                continue;
            }
            for b in 0..m {
                let rb = dof_of[corners[b]];
                if rb == usize::MAX {
                    continue;
                }
                tk.push((ra, rb, ek[a * m + b]));
                tv.push((ra, rb, ev[a * m + b]));
                tm.push((ra, rb, em[a * m + b]));
            }
        }
    }
    let dim = dof_nodes.len();
    let stiffness = SparseSym::from_triplets(dim, tk);
    let potential = SparseSym::from_triplets(dim, tv);
    let mass = SparseSym::from_triplets(dim, tm);
    let tol_eig = 1e-8 * (1.0 + (stiffness.norm_inf() + potential.norm_inf()) / mass.norm_inf());
    let a = stiffness.add_scaled(-1.0, &potential);
    let constraint = match opts.mode {
        BoundaryMode::Dirichlet => None,
        BoundaryMode::VolumeConstrained => Some(mass.mul_vec(&vec![1.0; dim])),
    };
    let spectrum = pencil_spectrum(&a, &mass, constraint.as_deref(), tol_eig, &opts.eigen)?;
    Ok(StabilityAssembly {
        grid,
        c,
        mode: opts.mode,
        dof_nodes,
        stiffness,
        potential,
        mass,
        spectrum,
        tol_eig,
    })
}

/// Integrals `(∫⟨K∇f,∇f⟩, ∫w f²)` of a nodal function for per-cell
/// coefficients `(K, w)` computed from the cell-midpoint geometry.
pub fn cell_quadratic_forms(
    field: &ShapeField,
    f: &ScalarField,
    form: impl Fn(&PointGeometry) -> (Vec<f64>, f64) + Sync + Send,
) -> Result<(f64, f64)> {
    let grid = field.grid();
    if f.len() != grid.len() {
        return invalid(format!(
            "function has {} nodes, grid has {}",
            f.len(),
            grid.len()
        ));
    }
    let cells = cell_geometry(field.patch(), grid)?;
    let coeffs = cell_forms(&cells, form);
    let n = grid.dim();
    let basis = ElementBasis::new(n, grid.h());
    let zero = vec![0.0; n * n];
    let m = basis.corners();
    let parts: Vec<(f64, f64)> = coeffs
        .par_iter()
        .enumerate()
        .map(|(cell, (k, w))| {
            let corners = grid.cell_corners(grid.cell_origin(cell));
            let fv: Vec<f64> = corners.iter().map(|&i| f.get(i)).collect();
            if fv.iter().all(|v| *v == 0.0) {
                return (0.0, 0.0);
            }
            let quad = |e: &[f64]| -> f64 {
                (0..m)
                    .map(|a| fv[a] * (0..m).map(|b| e[a * m + b] * fv[b]).sum::<f64>())
                    .sum()
            };
            (
                quad(&basis.element(k, 0.0)),
                quad(&basis.element(&zero, *w)),
            )
        })
        .collect();
    // fixed-order reduction
    Ok(parts
        .iter()
        .fold((0.0, 0.0), |(s, t), (a, b)| (s + a, t + b)))
}

/// `Q₁(f)` for a nodal function vanishing on the outermost node layer.
pub fn q1_value(field: &ShapeField, f: &ScalarField, c: f64) -> Result<f64> {
    let grid = field.grid();
    if f.len() != grid.len() {
        return invalid(format!(
            "function has {} nodes, grid has {}",
            f.len(),
            grid.len()
        ));
    }
    if let Some(idx) = (0..grid.len()).find(|&i| grid.depth(i) == 0 && f.get(i) != 0.0) {
        return invalid(format!(
            "test function is nonzero on the boundary at node {idx}"
        ));
    }
    if f.values().iter().any(|v| !v.is_finite()) {
        return invalid("test function has non-finite values");
    }
    let (k, v) = cell_quadratic_forms(field, f, |pg| {
        let cc = q1_coefficients(pg, c);
        (cc.stiffness, cc.potential)
    })?;
    Ok(k - v)
}
