//! Integrals over lattice geodesic balls and the certificates built on them.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use super::assembly::cell_quadratic_forms;
use super::cutoff::CutoffProfile;
use crate::error::{invalid, Error, Result};
use crate::graphgeo::distance::geodesic_distance;
use crate::graphgeo::field::{ScalarField, ShapeField};
use crate::graphgeo::grid::Grid;

/// Geodesic balls are sublevel sets of the lattice distance, which
/// overestimates the true distance; balls are therefore slightly too small.
pub const BALL_BIAS_NOTE: &str =
    "balls are sublevel sets of an axis-restricted lattice distance, which overestimates intrinsic distance (up to a factor sqrt(n) on flat patches); reported balls are subsets of the true geodesic balls";

/// Volume of the unit ball in `ℝⁿ`.
pub fn unit_ball_volume(n: usize) -> f64 {
    // ω_n = π^{n/2} / Γ(n/2 + 1), by the two-step recurrence
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Dual-cell weight of each node: `√g hⁿ`, halved once per boundary face the
/// node lies on; zero on degenerate chart nodes.
fn node_weights(field: &ShapeField) -> Vec<f64> {
    let grid = field.grid();
    let hn = grid.h().powi(grid.dim() as i32);
    (0..grid.len())
        .map(|idx| {
            if !field.is_valid(idx) {
                return 0.0;
            }
            let faces = grid
                .multi(idx)
                .iter()
                .zip(grid.dims())
                .filter(|(&k, &d)| k == 0 || k + 1 == d)
                .count();
            field.sqrt_det_g(idx) * hn * 0.5f64.powi(faces as i32)
        })
        .collect()
}

/// Smallest lattice distance from the base point to the patch boundary.
fn boundary_distance(grid: &Grid, r: &ScalarField) -> f64 {
    (0..grid.len())
        .filter(|&i| grid.depth(i) == 0)
        .map(|i| r.get(i))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthRow {
    pub radius: f64,
    /// Riemannian volume of the ball.
    pub vol1: f64,
    pub s1_int: f64,
    pub s1cubed_int: f64,
    /// `R⁻²∫S₁³`.
    pub ratio2: f64,
    /// `R⁻ⁿ∫S₁`.
    pub ration: f64,
    /// The ball reaches the patch boundary, so it is cut off by the patch.
    pub truncated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub label: String,
    pub base_point: Vec<f64>,
    pub h: f64,
    pub boundary_distance: f64,
    pub s1_nonnegative: bool,
    pub rows: Vec<GrowthRow>,
    pub note: &'static str,
}

impl GrowthReport {
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "R,vol1,S1_int,S1cubed_int,ratio2,ration")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.radius, r.vol1, r.s1_int, r.s1cubed_int, r.ratio2, r.ration
            )?;
        }
        Ok(())
    }

    /// Two-column whitespace data: `R` against the selected column.
    pub fn write_plot(
        &self,
        mut out: impl Write,
        column: impl Fn(&GrowthRow) -> f64,
    ) -> std::io::Result<()> {
        for r in &self.rows {
            writeln!(out, "{} {}", r.radius, column(r))?;
        }
        Ok(())
    }

    /// True when every integral column is nondecreasing in `R`.
    pub fn monotone(&self) -> bool {
        self.rows.windows(2).all(|w| {
            w[1].vol1 >= w[0].vol1
                && w[1].s1_int >= w[0].s1_int
                && w[1].s1cubed_int >= w[0].s1cubed_int
        })
    }
}

fn ball_integrals(
    field: &ShapeField,
    r: &ScalarField,
    weights: &[f64],
    radius: f64,
) -> (f64, f64, f64) {
    let (mut vol, mut s1, mut s1c) = (0.0, 0.0, 0.0);
    for idx in 0..weights.len() {
        if weights[idx] == 0.0 || r.get(idx) > radius {
            continue;
        }
        let s = field.s(idx, 1);
        vol += weights[idx];
        s1 += weights[idx] * s;
        s1c += weights[idx] * s * s * s;
    }
    (vol, s1, s1c)
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return invalid("radii must be a nonempty list of positive numbers");
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("radii must be strictly increasing");
    }
    Ok(())
}

pub fn growth_scan(field: &ShapeField, p0: &[f64], radii: &[f64]) -> Result<GrowthReport> {
    check_radii(radii)?;
    let grid = field.grid();
    let n = grid.dim() as i32;
    let r = geodesic_distance(field, p0)?;
    let weights = node_weights(field);
    let bd = boundary_distance(grid, &r);
    let (lo, _) = field.s_range(1);
    let rows = radii
        .iter()
        .map(|&radius| {
            let (vol1, s1_int, s1cubed_int) = ball_integrals(field, &r, &weights, radius);
            GrowthRow {
                radius,
                vol1,
                s1_int,
                s1cubed_int,
                ratio2: s1cubed_int / (radius * radius),
                ration: s1_int / radius.powi(n),
                truncated: radius >= bd,
            }
        })
        .collect();
    Ok(GrowthReport {
        label: field.patch().label().to_string(),
        base_point: p0.to_vec(),
        h: grid.h(),
        boundary_distance: bd,
        s1_nonnegative: lo >= -1e-12,
        rows,
        note: BALL_BIAS_NOTE,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthBoundReport {
    pub theta: f64,
    pub radius: f64,
    /// `∫_{B_{θR}} S₁ dM`.
    pub lhs: f64,
    /// `C(n)Rⁿ/(1−θ)` with `C(n) = 2ω_n`.
    pub rhs: f64,
    pub constant: f64,
    pub slack: f64,
    pub truncated: bool,
}

/// Compares `∫_{B_{θR}} S₁` with `2ω_n Rⁿ/(1−θ)` on a graph with `S₁ ≥ 0`.
pub fn graph_growth_bound_check(
    field: &ShapeField,
    p0: &[f64],
    theta: f64,
    radius: f64,
) -> Result<GrowthBoundReport> {
    if !field.patch().is_graph() {
        return invalid("growth bound applies to graph patches");
    }
    if !(theta > 0.0 && theta < 1.0) {
        return invalid(format!("theta must lie in (0, 1), got {theta}"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return invalid(format!("radius must be positive, got {radius}"));
    }
    let (lo, hi) = field.s_range(1);
    if lo < -1e-12 * (1.0 + hi.abs()) {
        return Err(Error::PreconditionViolation(format!(
            "S1 changes sign on the patch: range [{lo}, {hi}]"
        )));
    }
    let grid = field.grid();
    let n = grid.dim();
    let r = geodesic_distance(field, p0)?;
    let weights = node_weights(field);
    let (_, lhs, _) = ball_integrals(field, &r, &weights, theta * radius);
    let constant = 2.0 * unit_ball_volume(n);
    let rhs = constant * radius.powi(n as i32) / (1.0 - theta);
    Ok(GrowthBoundReport {
        theta,
        radius,
        lhs,
        rhs,
        constant,
        slack: rhs - lhs,
        truncated: theta * radius >= boundary_distance(grid, &r),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateMode {
    /// Hypotheses met and strong stability supplied: the inequality is asserted.
    Asserted,
    ReportOnly,
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma32Report {
    /// `∫ S₁|∇f|² dM`.
    pub lhs: f64,
    /// `(2/n) ∫ (S₂ + n(n−1)c/2) S₁ f² dM`.
    pub rhs: f64,
    pub ratio: Option<f64>,
    /// Constant in `∫S₁|∇f|² ≥ C∫S₁f²` when `S₂` is constant: `2(S₂ + n(n−1)c/2)/n`.
    pub constant: f64,
    pub mode: CertificateMode,
    pub holds: Option<bool>,
    pub notes: Vec<String>,
}

/// Evaluates both sides of `∫S₁|∇f|² ≥ (2/n)∫(S₂ + n(n−1)c/2)S₁f²` for the
/// cutoff `f = φ(r)` about `p0`. `neg_count` is the Dirichlet index of the
/// same patch; the inequality is asserted only when it is zero and the
/// curvature hypotheses hold.
pub fn lemma32_certificate(
    field: &ShapeField,
    p0: &[f64],
    profile: &CutoffProfile,
    c: f64,
    neg_count: Option<usize>,
) -> Result<Lemma32Report> {
    profile.validate()?;
    let grid = field.grid();
    let n = grid.dim();
    let r = geodesic_distance(field, p0)?;
    let values = (0..grid.len())
        .map(|i| {
            if grid.depth(i) == 0 {
                0.0
            } else {
                profile.value(r.get(i))
            }
        })
        .collect();
    let f = ScalarField::new(values, 0);
    let shift = n as f64 * (n as f64 - 1.0) * c / 2.0;
    let (lhs, rhs_raw) = cell_quadratic_forms(field, &f, |pg| {
        let sg = pg.det_g.sqrt();
        let s1 = pg.s(1);
        let k = pg.g_inv.iter().map(|v| v * s1 * sg).collect::<Vec<f64>>();
        // nalgebra stores column-major; g⁻¹ is symmetric so the layout agrees
        (k, (pg.s(2) + shift) * s1 * sg)
    })?;
    let rhs = 2.0 / n as f64 * rhs_raw;

    let mut notes = Vec::new();
    let (s2_lo, s2_hi) = field.s_range(2);
    let (s1_lo, _) = field.s_range(1);
    let s2_constant = s2_hi - s2_lo <= 1e-6 * (1.0 + s2_hi.abs());
    if !s2_constant {
        notes.push(format!("S2 is not constant: range [{s2_lo}, {s2_hi}]"));
    }
    if !(s2_lo > 0.0) {
        notes.push(format!("S2 must be strictly positive, minimum {s2_lo}"));
        if c == 0.0 && s2_lo.abs() <= 1e-12 {
            notes.push("S2 = 0 boundary case is excluded".into());
        }
    }
    if !(s1_lo > 0.0) {
        notes.push(format!("S1 must be positive, minimum {s1_lo}"));
    }
    match neg_count {
        Some(0) => {}
        Some(k) => notes.push(format!("patch is not strongly stable: Dirichlet index {k}")),
        None => notes.push("no stability information supplied".into()),
    }
    let mode = if notes.is_empty() {
        CertificateMode::Asserted
    } else {
        CertificateMode::ReportOnly
    };
    let ratio = (rhs != 0.0).then(|| lhs / rhs);
    let tol = 1e-10 * (lhs.abs() + rhs.abs());
    Ok(Lemma32Report {
        lhs,
        rhs,
        ratio,
        constant: 2.0 * (0.5 * (s2_lo + s2_hi) + shift) / n as f64,
        mode,
        holds: (mode == CertificateMode::Asserted).then_some(lhs + tol >= rhs),
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphgeo::patch::{Domain, SurfacePatch};

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn flat_scan_has_zero_curvature_integrals() {
        let p = SurfacePatch::flat(2, Domain::cube(2, 2.0)).unwrap();
        let f = ShapeField::build(&p, 0.1).unwrap();
        let g = growth_scan(&f, &[0.0, 0.0], &[0.5, 1.0, 1.5, 3.0]).unwrap();
        assert!(g
            .rows
            .iter()
            .all(|r| r.s1_int == 0.0 && r.s1cubed_int == 0.0));
        assert!(g.monotone());
        assert!(!g.rows[2].truncated && g.rows[3].truncated);
        // axis-restricted balls lie between the ℓ¹ ball (area 2R²) and the disc
        let a = g.rows[1].vol1;
        assert!(a > 1.8 && a < PI);
        let b = graph_growth_bound_check(&f, &[0.0, 0.0], 0.5, 1.0).unwrap();
        assert_eq!(b.lhs, 0.0);
        assert!(b.slack > 0.0);
    }

    #[test]
    fn hemisphere_scan_is_bounded_by_area() {
        let p = SurfacePatch::hemisphere_graph(3, 2.0, 0.5).unwrap();
        let f = ShapeField::build(&p, 0.1).unwrap();
        let g = growth_scan(&f, &[0.0; 3], &[0.2, 0.5, 0.8, 2.0]).unwrap();
        assert!(g.monotone());
        for row in &g.rows {
            assert!((row.s1_int - 1.5 * row.vol1).abs() < 1e-10 * row.vol1.max(1.0));
        }
        let full = g.rows.last().unwrap();
        assert!(full.truncated);
        let mut csv = Vec::new();
        g.write_csv(&mut csv).unwrap();
        assert!(String::from_utf8(csv)
            .unwrap()
            .starts_with("R,vol1,S1_int,S1cubed_int,ratio2,ration\n"));
    }

    #[test]
    fn growth_bound_rejects_sign_change() {
        let p = SurfacePatch::one_variable_graph(
            crate::graphgeo::patch::Profile::Cube,
            Domain::cube(2, 1.0),
        )
        .unwrap();
        let f = ShapeField::build(&p, 0.1).unwrap();
        assert!(matches!(
            graph_growth_bound_check(&f, &[0.0, 0.0], 0.5, 1.0),
            Err(Error::PreconditionViolation(_))
        ));
    }

    #[test]
    fn certificate_on_zero_function() {
        let p = SurfacePatch::hemisphere_graph(2, 1.0, 0.5).unwrap();
        let f = ShapeField::build(&p, 0.05).unwrap();
        // support entirely inside the first node: the cutoff vanishes at every interior node
        let prof = CutoffProfile::Lemma32Outside {
            inner_radius: 10.0,
            radius: 1.0,
        };
        let rep = lemma32_certificate(&f, &[0.0, 0.0], &prof, 0.0, Some(0)).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert_eq!(rep.rhs, 0.0);
        assert_eq!(rep.ratio, None);
    }
}
