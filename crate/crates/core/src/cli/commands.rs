//! Command bodies. Each returns one [`Outcome`] per declared check and writes
//! its tables through [`Artifacts`].

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::params::*;
use super::report::Outcome;
use super::sampling;
use super::RunError;
use crate::convergence::{orders, ObservedOrder};
use crate::curvalg::{
    elem_sym, elementary_symmetric, estima_audit, maclaurin_check, trace_identity_report,
};
use crate::curvalg::{EstimaAudit, PrincipalSpectrum, ShapeOperator};
use crate::graphgeo::ops::reilly_residual_excluding;
use crate::graphgeo::{
    eqn16_residual, l1s1_identity_residual, point_geometry, s1_divform, Domain, ShapeField,
};
use crate::stability::{
    graph_growth_bound_check, growth::CertificateMode, growth_scan, index_estimate,
    lemma32_certificate, BoundaryMode, EigenOptions, IndexOptions,
};
use crate::tensorid::{ssy_left, ssy_right};

type Outcomes = Result<Vec<Outcome>, RunError>;

/// Output directory plus the list of files written so far.
pub(super) struct Artifacts {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

impl Artifacts {
    pub fn create(&mut self, name: &str) -> Result<BufWriter<File>, RunError> {
        let file =
            File::create(self.dir.join(name)).map_err(|e| RunError::Io(format!("{name}: {e}")))?;
        self.files.push(name.to_string());
        Ok(BufWriter::new(file))
    }

    /// Writes a table with a header row; each row is already formatted.
    pub fn table(&mut self, name: &str, header: &str, rows: &[String]) -> Result<(), RunError> {
        let mut w = self.create(name)?;
        writeln!(w, "{header}")?;
        for r in rows {
            writeln!(w, "{r}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn plot(&mut self, name: &str, points: &[(f64, f64)]) -> Result<(), RunError> {
        let mut w = self.create(name)?;
        for (x, y) in points {
            writeln!(w, "{x} {y}")?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(super) fn execute(cmd: &Command, seed: u64, art: &mut Artifacts) -> Outcomes {
    match cmd {
        Command::Identities(p) => identities(p, seed, art),
        Command::Curvature(p) => curvature(p, seed, art),
        Command::Reilly(p) => reilly(p, art),
        Command::Eqn16(p) => eqn16(p, art),
        Command::StabilityIndex(p) => stability(p, seed, art),
        Command::Growth(p) => growth(p, art),
        Command::Audit(p) => audit(p, seed, art),
    }
}

fn outcome(
    name: &'static str,
    holds: Option<bool>,
    measured: Value,
    detail: impl Into<String>,
) -> Outcome {
    Outcome {
        name,
        holds,
        measured,
        detail: detail.into(),
    }
}

/// Orders between consecutive levels and whether all of them reach `min`.
fn order_summary(levels: &[(f64, f64)], min: f64) -> (Vec<ObservedOrder>, bool, String) {
    let ords = orders(levels);
    let ok = ords.iter().all(|o| o.meets(min));
    let text: Vec<String> = ords
        .iter()
        .map(|o| match o {
            ObservedOrder::Exact => "exact".to_string(),
            ObservedOrder::Order(p) => format!("{p:.3}"),
        })
        .collect();
    (
        ords,
        ok,
        format!("observed orders [{}], required >= {min}", text.join(", ")),
    )
}

fn identities(p: &IdentitiesParams, seed: u64, art: &mut Artifacts) -> Outcomes {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut trace_rows = Vec::new();
    let (mut trace_max, mut brute_max) = (0.0f64, 0.0f64);
    for &n in &p.dims {
        let (mut t, mut b) = (0.0f64, 0.0f64);
        for _ in 0..p.samples {
            let a = ShapeOperator::new(sampling::symmetric_matrix(&mut rng, n))?;
            for r in 0..=n - 2 {
                t = t.max(trace_identity_report(&a, r)?.max());
            }
            b = b.max(brute_force_error(&sampling::spectrum(&mut rng, n)));
        }
        trace_rows.push(format!("{n},{},{t},{b}", p.samples));
        trace_max = trace_max.max(t);
        brute_max = brute_max.max(b);
    }
    art.table(
        "identities_trace.csv",
        "n,samples,max_trace_residual,max_brute_force_error",
        &trace_rows,
    )?;

    let mut ssy_rows = Vec::new();
    let (mut ssy_max, mut right_min) = (0.0f64, f64::INFINITY);
    for &n in &p.ssy_dims {
        let (mut gap, mut lo) = (0.0f64, f64::INFINITY);
        for _ in 0..p.ssy_samples {
            let (h, c) = sampling::shape_and_tensor(&mut rng, n, p.min_norm_a);
            let (l, r) = (ssy_left(&h, &c)?, ssy_right(&h, &c)?);
            gap = gap.max((l - r).abs() / (1.0 + r.abs()));
            lo = lo.min(r);
        }
        ssy_rows.push(format!("{n},{},{gap},{lo}", p.ssy_samples));
        ssy_max = ssy_max.max(gap);
        right_min = right_min.min(lo);
    }
    art.table(
        "identities_ssy.csv",
        "n,samples,max_relative_gap,min_right",
        &ssy_rows,
    )?;

    let mut mac_rows = Vec::new();
    let mut violations = 0usize;
    for &n in &p.maclaurin_dims {
        let (accepted, attempts, v) = maclaurin_batch(&mut rng, n, p.maclaurin_samples)?;
        mac_rows.push(format!("{n},{accepted},{attempts},{v}"));
        violations += v;
    }
    art.table(
        "identities_maclaurin.csv",
        "n,accepted,attempts,violations",
        &mac_rows,
    )?;

    Ok(vec![
        outcome(
            "trace_identities",
            Some(trace_max <= p.tolerance),
            json!({"max_residual": trace_max, "tolerance": p.tolerance}),
            format!("max relative residual {trace_max:.3e}"),
        ),
        outcome(
            "elem_sym_brute_force",
            Some(brute_max <= p.brute_force_tolerance),
            json!({"max_error": brute_max, "tolerance": p.brute_force_tolerance}),
            format!("max relative error {brute_max:.3e}"),
        ),
        outcome(
            "ssy_identity",
            Some(ssy_max <= p.tolerance),
            json!({"max_relative_gap": ssy_max, "tolerance": p.tolerance}),
            format!("max relative gap {ssy_max:.3e}"),
        ),
        outcome(
            "ssy_nonnegative",
            Some(right_min >= -1e-12),
            json!({"min_right": right_min}),
            format!("smallest sum of squares {right_min:.3e}"),
        ),
        outcome(
            "maclaurin",
            Some(violations == 0),
            json!({"violations": violations}),
            format!("{violations} violations"),
        ),
    ])
}

/// Largest error of the recursive `S_r` against subset enumeration, relative
/// to the enumeration of `|λ|` (which bounds the rounding of both).
fn brute_force_error(lambda: &[f64]) -> f64 {
    let n = lambda.len();
    let mut sum = vec![0.0; n + 1];
    let mut abs = vec![0.0; n + 1];
    for mask in 0u32..(1 << n) {
        let k = mask.count_ones() as usize;
        let prod: f64 = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| lambda[i])
            .product();
        sum[k] += prod;
        abs[k] += prod.abs();
    }
    let e = elementary_symmetric(lambda);
    (0..=n)
        .map(|r| (e[r] - sum[r]).abs() / abs[r].max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

fn maclaurin_batch(
    rng: &mut ChaCha8Rng,
    n: usize,
    want: usize,
) -> Result<(usize, usize, usize), RunError> {
    let (mut accepted, mut attempts, mut violations) = (0, 0, 0);
    while accepted < want {
        attempts += 1;
        if attempts > 1000 * want {
            return Err(RunError::Numerical(format!(
                "rejection sampler accepted only {accepted} of {attempts} spectra for n = {n}"
            )));
        }
        let spec = PrincipalSpectrum::new(sampling::spectrum(rng, n))?;
        let rep = maclaurin_check(&spec);
        if rep.hypotheses_met {
            accepted += 1;
            violations += rep.violations();
        }
    }
    Ok((accepted, attempts, violations))
}

fn curvature(p: &CurvatureParams, seed: u64, art: &mut Artifacts) -> Outcomes {
    let patch = p.patch.build()?;
    let h = grid_spacing(&p.patch, p.grid_h);
    let field = ShapeField::build(&patch, h)?;
    let mut w = art.create("curvature.csv")?;
    field.write_csv(&mut w)?;
    w.flush()?;

    let Some(d) = &p.divform else {
        return Ok(Vec::new());
    };
    let n = patch.dim();
    let (lo, hi) = match patch.domain() {
        Domain::Box { lo, hi } => (lo.clone(), hi.clone()),
        Domain::Ball { center, radius } => {
            let half = radius / (n as f64).sqrt();
            (
                center.iter().map(|c| c - half).collect(),
                center.iter().map(|c| c + half).collect(),
            )
        }
    };
    // central differences reach one step beyond the sample point
    let margin = 1.5 * d.steps[0];
    if lo.iter().zip(&hi).any(|(a, b)| b - a <= 2.0 * margin) {
        return Err(RunError::Invalid(format!(
            "divform step {} is too large for the domain",
            d.steps[0]
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = sampling::box_points(&mut rng, &lo, &hi, margin, d.points);
    let exact: Vec<f64> = points
        .iter()
        .map(|x| point_geometry(&patch, x).map(|g| g.s(1)))
        .collect::<crate::Result<_>>()?;
    let mut levels = Vec::new();
    for &step in &d.steps {
        let mut sup = 0.0f64;
        for (x, s1) in points.iter().zip(&exact) {
            sup = sup.max((s1_divform(&patch, x, step)? - s1).abs());
        }
        levels.push((step, sup));
    }
    let rows: Vec<String> = levels.iter().map(|(s, e)| format!("{s},{e}")).collect();
    art.table("s1_divform.csv", "step,sup_error", &rows)?;
    art.plot("s1_divform.dat", &levels)?;
    let (ords, ok, detail) = order_summary(&levels, d.min_order);
    Ok(vec![outcome(
        "s1_divform_order",
        Some(ok),
        json!({"levels": levels, "orders": ords, "min_order": d.min_order}),
        detail,
    )])
}

fn reilly(p: &ReillyParams, art: &mut Artifacts) -> Outcomes {
    let patch = p.patch.build()?;
    let mut reports = Vec::new();
    for &h in &p.grid_h {
        reports.push(reilly_residual_excluding(&patch, h, p.exclusion_ring)?);
    }
    let levels: Vec<(f64, f64)> = reports.iter().map(|r| (r.h, r.sup_residual)).collect();
    let rows: Vec<String> = reports
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{}",
                r.h, r.sup_residual, r.excluded_width, r.s2_min, r.s2_max
            )
        })
        .collect();
    art.table(
        "reilly.csv",
        "h,sup_residual,excluded_width,S2_min,S2_max",
        &rows,
    )?;
    art.plot("reilly.dat", &levels)?;

    let (ords, ok, detail) = order_summary(&levels, p.min_order);
    let mut out = vec![outcome(
        "reilly_order",
        Some(ok),
        json!({"levels": reports, "orders": ords, "min_order": p.min_order}),
        detail,
    )];
    if let Some(max) = p.max_fine_residual {
        let fine = levels.last().expect("two levels").1;
        out.push(outcome(
            "reilly_fine_residual",
            Some(fine <= max),
            json!({"residual": fine, "max": max}),
            format!("finest sup residual {fine:.3e}, allowed {max:.3e}"),
        ));
    }
    Ok(out)
}

fn eqn16(p: &Eqn16Params, art: &mut Artifacts) -> Outcomes {
    let patch = p.patch.build()?;
    let mut reports = Vec::new();
    for &h in &p.grid_h {
        reports.push(match p.form {
            IdentityForm::S2Zero => eqn16_residual(&patch, h)?,
            IdentityForm::General => l1s1_identity_residual(&patch, h)?,
        });
    }
    let levels: Vec<(f64, f64)> = reports.iter().map(|r| (r.h, r.sup_residual)).collect();
    let rows: Vec<String> = reports
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{}",
                r.h, r.sup_residual, r.max_norm_gap, r.max_abs_s2
            )
        })
        .collect();
    art.table("eqn16.csv", "h,sup_residual,max_norm_gap,max_abs_S2", &rows)?;
    art.plot("eqn16.dat", &levels)?;

    let (ords, ok, detail) = order_summary(&levels, p.min_order);
    let mut out = vec![outcome(
        "identity_order",
        Some(ok),
        json!({"levels": reports, "orders": ords, "min_order": p.min_order}),
        detail,
    )];
    if let Some(max) = p.max_fine_residual {
        let fine = levels.last().expect("two levels").1;
        out.push(outcome(
            "identity_fine_residual",
            Some(fine <= max),
            json!({"residual": fine, "max": max}),
            format!("finest sup residual {fine:.3e}, allowed {max:.3e}"),
        ));
    }
    if let Some(tol) = p.norm_gap_tolerance {
        let gap = reports.iter().map(|r| r.max_norm_gap).fold(0.0, f64::max);
        out.push(outcome(
            "norm_gap",
            Some(gap <= tol),
            json!({"max_gap": gap, "tolerance": tol}),
            format!("max | |dA|^2 - |dS1|^2 | = {gap:.3e}"),
        ));
    }
    Ok(out)
}

fn stability(p: &StabilityParams, seed: u64, art: &mut Artifacts) -> Outcomes {
    let patch = p.patch.build()?;
    let defaults = EigenOptions::default();
    let opts = IndexOptions {
        mode: p.mode,
        eigen: EigenOptions {
            dense_limit: p.dense_limit.unwrap_or(defaults.dense_limit),
            want: p.eigenvalues,
            seed,
            ..defaults
        },
    };
    let mut summaries = Vec::new();
    let mut finest = None;
    for &h in &p.grid_h {
        let field = ShapeField::build(&patch, h)?;
        let asm = index_estimate(&field, p.c, &opts)?;
        summaries.push(asm.summary());
        finest = Some(field);
    }
    let finest = finest.expect("at least one level");

    let mut eig_rows = Vec::new();
    let mut level_rows = Vec::new();
    for s in &summaries {
        for (k, mu) in s.eigenvalues.iter().take(p.eigenvalues).enumerate() {
            eig_rows.push(format!("{},{k},{mu}", s.h));
        }
        level_rows.push(format!(
            "{},{},{},{},{},{}",
            s.h,
            s.dofs,
            s.neg_count,
            s.mu_min,
            s.tol_eig,
            serde_json::to_value(s.solver)?.as_str().unwrap_or_default()
        ));
    }
    art.table("eigenvalues.csv", "h,index,mu", &eig_rows)?;
    art.table(
        "stability.csv",
        "h,dofs,neg_count,mu_min,tol_eig,solver",
        &level_rows,
    )?;
    let mu_points: Vec<(f64, f64)> = summaries.iter().map(|s| (s.h, s.mu_min)).collect();
    art.plot("mu_min.dat", &mu_points)?;

    let mut out = Vec::new();
    if let Some(range) = p.neg_count {
        let counts: Vec<usize> = summaries.iter().map(|s| s.neg_count).collect();
        out.push(outcome(
            "neg_count",
            Some(counts.iter().all(|&k| range.contains(k))),
            json!({"levels": summaries, "expected_min": range.min, "expected_max": range.max}),
            match range.max {
                Some(max) => format!("index per level {counts:?}, expected {}..={max}", range.min),
                None => format!("index per level {counts:?}, expected >= {}", range.min),
            },
        ));
    }
    if let Some(min) = p.min_mu_ratio {
        let ratios: Vec<f64> = summaries
            .windows(2)
            .map(|w| w[0].mu_min.abs() / w[1].mu_min.abs())
            .collect();
        out.push(outcome(
            "mu_min_ratio",
            Some(ratios.iter().all(|&r| r >= min)),
            json!({"mu_min": mu_points, "ratios": ratios, "min_ratio": min}),
            format!("|mu_min| ratios {ratios:?}, required >= {min}"),
        ));
    }
    if let Some(l) = &p.lemma32 {
        let p0 = l.base_point.clone().unwrap_or_else(|| patch.base_point());
        // strong stability is the Dirichlet index; a constrained count says nothing about it
        let index =
            (p.mode == BoundaryMode::Dirichlet).then(|| summaries.last().expect("level").neg_count);
        let rep = lemma32_certificate(&finest, &p0, &l.profile, p.c, index)?;
        let detail = match rep.ratio {
            Some(r) if rep.mode == CertificateMode::Asserted => {
                format!("ratio {r:.4}; hypotheses met")
            }
            Some(r) => format!("ratio {r:.4}; hypotheses unmet: {}", rep.notes.join("; ")),
            None => "both sides vanish".to_string(),
        };
        out.push(outcome(
            "lemma32_certificate",
            rep.holds,
            serde_json::to_value(&rep)?,
            detail,
        ));
    }
    Ok(out)
}

fn growth(p: &GrowthParams, art: &mut Artifacts) -> Outcomes {
    let patch = p.patch.build()?;
    let field = ShapeField::build(&patch, grid_spacing(&p.patch, p.grid_h))?;
    let p0 = p.base_point.clone().unwrap_or_else(|| patch.base_point());
    let rep = growth_scan(&field, &p0, &p.radii)?;
    let mut w = art.create("growth.csv")?;
    rep.write_csv(&mut w)?;
    w.flush()?;
    for (name, col) in [
        (
            "growth_s1.dat",
            (|r: &crate::stability::growth::GrowthRow| r.s1_int) as fn(&_) -> f64,
        ),
        ("growth_ratio2.dat", |r| r.ratio2),
        ("growth_ration.dat", |r| r.ration),
    ] {
        let mut w = art.create(name)?;
        rep.write_plot(&mut w, col)?;
        w.flush()?;
    }

    let truncated = rep.rows.iter().filter(|r| r.truncated).count();
    let mut out = vec![if rep.s1_nonnegative {
        let ok = rep.monotone();
        outcome(
            "monotone",
            Some(ok),
            json!({"report": rep}),
            format!("integrals nondecreasing: {ok}; {truncated} truncated radii"),
        )
    } else {
        outcome(
            "monotone",
            None,
            json!({"report": rep}),
            "S1 changes sign; monotonicity is not implied",
        )
    }];

    if let Some(b) = &p.bound {
        let mut rows = Vec::new();
        let mut checks = Vec::new();
        for &theta in &b.thetas {
            for &r in &b.radii {
                let c = graph_growth_bound_check(&field, &p0, theta, r)?;
                rows.push(format!(
                    "{},{},{},{},{},{}",
                    c.theta, c.radius, c.lhs, c.rhs, c.slack, c.truncated
                ));
                checks.push(c);
            }
        }
        art.table("growth_bound.csv", "theta,R,lhs,rhs,slack,truncated", &rows)?;
        let min_slack = checks.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min);
        out.push(outcome(
            "growth_bound",
            Some(min_slack >= 0.0),
            json!({"min_slack": min_slack, "rows": checks}),
            format!(
                "smallest slack {min_slack:.4e} over {} (theta, R) pairs",
                checks.len()
            ),
        ));
    }
    Ok(out)
}

struct AuditRow {
    source: &'static str,
    lambda: Vec<f64>,
    audit: EstimaAudit,
    violations: usize,
}

fn audit(p: &AuditParams, seed: u64, art: &mut Artifacts) -> Outcomes {
    let mut rows = Vec::new();
    let mut push = |source, lambda: Vec<f64>| -> Result<(), RunError> {
        let spec = PrincipalSpectrum::new(lambda.clone())?;
        rows.push(AuditRow {
            source,
            lambda,
            audit: estima_audit(&spec),
            violations: maclaurin_check(&spec).violations(),
        });
        Ok(())
    };
    for s in &p.spectra {
        push("explicit", s.clone())?;
    }
    if let Some(r) = &p.random {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for &n in &r.dims {
            for _ in 0..r.samples {
                push("random", sampling::spectrum(&mut rng, n))?;
            }
        }
    }

    let mut lines = Vec::new();
    let mut explicit = Vec::new();
    let (mut psd, mut weak_fail, mut strong_fail, mut violations) = (0, 0, 0, 0);
    for row in &rows {
        let lam: Vec<String> = row.lambda.iter().map(f64::to_string).collect();
        let s1 = elem_sym(&PrincipalSpectrum::new(row.lambda.clone())?).s(1);
        violations += row.violations;
        let (is_psd, max_eig, strong, weak) = match row.audit {
            EstimaAudit::NotPsd { .. } => (false, None, None, None),
            EstimaAudit::Evaluated {
                max_eigenvalue,
                strong_holds,
                weak_holds,
                ..
            } => {
                psd += 1;
                weak_fail += usize::from(!weak_holds);
                strong_fail += usize::from(!strong_holds);
                (
                    true,
                    Some(max_eigenvalue),
                    Some(strong_holds),
                    Some(weak_holds),
                )
            }
        };
        let opt = |v: Option<String>| v.unwrap_or_default();
        lines.push(format!(
            "{},{},{},{is_psd},{s1},{},{},{},{}",
            row.source,
            row.lambda.len(),
            lam.join(";"),
            opt(max_eig.map(|v| v.to_string())),
            opt(strong.map(|v| v.to_string())),
            opt(weak.map(|v| v.to_string())),
            row.violations
        ));
        if row.source == "explicit" {
            explicit.push(json!({
                "lambda": row.lambda, "p1_psd": is_psd, "s1": s1, "max_eig_p1": max_eig,
                "strong_holds": strong, "weak_holds": weak, "maclaurin_violations": row.violations,
            }));
        }
    }
    art.table(
        "audit.csv",
        "source,n,lambda,p1_psd,S1,max_eig_P1,strong_holds,weak_holds,maclaurin_violations",
        &lines,
    )?;

    Ok(vec![
        outcome(
            "estima_weak",
            Some(weak_fail == 0),
            json!({"psd_samples": psd, "failures": weak_fail}),
            format!("{weak_fail} failures among {psd} samples with psd P1"),
        ),
        outcome(
            "estima_strong",
            Some(strong_fail == 0),
            json!({"psd_samples": psd, "failures": strong_fail, "explicit": explicit}),
            format!("strong form fails on {strong_fail} of {psd} samples with psd P1"),
        ),
        outcome(
            "maclaurin",
            Some(violations == 0),
            json!({"violations": violations}),
            format!("{violations} violations"),
        ),
    ])
}
