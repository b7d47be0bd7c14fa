//! Per-command parameters. Every physical quantity is explicit; there are
//! no defaults for radii, grid spacings or curvature scales.

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use super::report::CheckMode;
use crate::error::{invalid, Error, Result};
use crate::graphgeo::PatchDescriptor;
use crate::stability::{BoundaryMode, CutoffProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Identities,
    Curvature,
    Reilly,
    Eqn16,
    StabilityIndex,
    Growth,
    Audit,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Identities => "identities",
            CommandKind::Curvature => "curvature",
            CommandKind::Reilly => "reilly",
            CommandKind::Eqn16 => "eqn16",
            CommandKind::StabilityIndex => "stability-index",
            CommandKind::Growth => "growth",
            CommandKind::Audit => "audit",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitiesParams {
    /// Dimensions for the trace identities and the subset-enumeration oracle.
    pub dims: Vec<usize>,
    pub samples: usize,
    pub ssy_dims: Vec<usize>,
    pub ssy_samples: usize,
    /// Lower bound on `|A|` for sampled second fundamental forms.
    pub min_norm_a: f64,
    pub maclaurin_dims: Vec<usize>,
    /// Accepted spectra (with `S₂ ≥ 0`, `S₁ > 0`) per dimension.
    pub maclaurin_samples: usize,
    /// Relative tolerance for the trace and tensor identities.
    pub tolerance: f64,
    pub brute_force_tolerance: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivformParams {
    pub points: usize,
    /// Strictly decreasing difference steps.
    pub steps: Vec<f64>,
    pub min_order: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureParams {
    pub patch: PatchDescriptor,
    #[serde(default)]
    pub grid_h: Option<f64>,
    #[serde(default)]
    pub divform: Option<DivformParams>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReillyParams {
    pub patch: PatchDescriptor,
    pub grid_h: Vec<f64>,
    /// Physical width of the boundary layer left out of the sup.
    pub exclusion_ring: f64,
    pub min_order: f64,
    #[serde(default)]
    pub max_fine_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityForm {
    /// `L₁S₁ = |∇A|² − |∇S₁|² + 3S₁S₃`, for patches with `S₂ ≡ 0`.
    S2Zero,
    /// Adds `S₁²S₂ − 4S₂² + ΔS₂`; any Euclidean hypersurface.
    General,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Eqn16Params {
    pub patch: PatchDescriptor,
    pub grid_h: Vec<f64>,
    pub form: IdentityForm,
    pub min_order: f64,
    #[serde(default)]
    pub max_fine_residual: Option<f64>,
    /// Bound on `| |∇A|² − |∇S₁|² |` at every node, when given.
    #[serde(default)]
    pub norm_gap_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountRange {
    pub min: usize,
    #[serde(default)]
    pub max: Option<usize>,
}

impl CountRange {
    pub fn contains(&self, k: usize) -> bool {
        k >= self.min && self.max.is_none_or(|m| k <= m)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma32Params {
    pub profile: CutoffProfile,
    #[serde(default)]
    pub base_point: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityParams {
    pub patch: PatchDescriptor,
    /// Strictly decreasing; every level is solved.
    pub grid_h: Vec<f64>,
    /// Ambient curvature in the potential.
    pub c: f64,
    pub mode: BoundaryMode,
    /// Lowest eigenvalues reported per level.
    pub eigenvalues: usize,
    #[serde(default)]
    pub dense_limit: Option<usize>,
    /// Expected index at every level.
    #[serde(default)]
    pub neg_count: Option<CountRange>,
    /// Minimum of `|μ_min(h)| / |μ_min(h')|` between consecutive levels.
    #[serde(default)]
    pub min_mu_ratio: Option<f64>,
    #[serde(default)]
    pub lemma32: Option<Lemma32Params>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundParams {
    pub thetas: Vec<f64>,
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthParams {
    pub patch: PatchDescriptor,
    #[serde(default)]
    pub grid_h: Option<f64>,
    #[serde(default)]
    pub base_point: Option<Vec<f64>>,
    /// Strictly increasing.
    pub radii: Vec<f64>,
    #[serde(default)]
    pub bound: Option<BoundParams>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpectra {
    pub dims: Vec<usize>,
    pub samples: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditParams {
    /// Spectra audited and reported individually.
    pub spectra: Vec<Vec<f64>>,
    #[serde(default)]
    pub random: Option<RandomSpectra>,
}

#[derive(Debug, Clone)]
pub enum Command {
    Identities(IdentitiesParams),
    Curvature(CurvatureParams),
    Reilly(ReillyParams),
    Eqn16(Eqn16Params),
    StabilityIndex(StabilityParams),
    Growth(GrowthParams),
    Audit(AuditParams),
}

fn parse<T: DeserializeOwned>(kind: CommandKind, v: &Value) -> Result<T> {
    serde_json::from_value(v.clone())
        .map_err(|e| Error::InvalidInput(format!("{} params: {e}", kind.name())))
}

impl Command {
    pub fn parse(kind: CommandKind, params: &Value) -> Result<Self> {
        let cmd = match kind {
            CommandKind::Identities => Command::Identities(parse(kind, params)?),
            CommandKind::Curvature => Command::Curvature(parse(kind, params)?),
            CommandKind::Reilly => Command::Reilly(parse(kind, params)?),
            CommandKind::Eqn16 => Command::Eqn16(parse(kind, params)?),
            CommandKind::StabilityIndex => Command::StabilityIndex(parse(kind, params)?),
            CommandKind::Growth => Command::Growth(parse(kind, params)?),
            CommandKind::Audit => Command::Audit(parse(kind, params)?),
        };
        cmd.validate()?;
        Ok(cmd)
    }

    fn validate(&self) -> Result<()> {
        match self {
            Command::Identities(p) => {
                dims("dims", &p.dims, 2)?;
                dims("ssy_dims", &p.ssy_dims, 2)?;
                dims("maclaurin_dims", &p.maclaurin_dims, 3)?;
                for (name, v) in [
                    ("samples", p.samples),
                    ("ssy_samples", p.ssy_samples),
                    ("maclaurin_samples", p.maclaurin_samples),
                ] {
                    if v == 0 {
                        return invalid(format!("{name} must be positive"));
                    }
                }
                if p.dims.iter().any(|&n| n > 16) {
                    return invalid("subset enumeration is limited to n <= 16");
                }
                positive("min_norm_a", p.min_norm_a)?;
                positive("tolerance", p.tolerance)?;
                positive("brute_force_tolerance", p.brute_force_tolerance)
            }
            Command::Curvature(p) => {
                single_grid(&p.patch, p.grid_h)?;
                if let Some(d) = &p.divform {
                    if d.points == 0 {
                        return invalid("divform.points must be positive");
                    }
                    refinement("divform.steps", &d.steps, 2)?;
                    positive("divform.min_order", d.min_order)?;
                }
                Ok(())
            }
            Command::Reilly(p) => {
                no_descriptor_grid(&p.patch)?;
                refinement("grid_h", &p.grid_h, 2)?;
                nonnegative("exclusion_ring", p.exclusion_ring)?;
                positive("min_order", p.min_order)?;
                p.max_fine_residual
                    .map_or(Ok(()), |v| positive("max_fine_residual", v))
            }
            Command::Eqn16(p) => {
                no_descriptor_grid(&p.patch)?;
                refinement("grid_h", &p.grid_h, 2)?;
                positive("min_order", p.min_order)?;
                p.max_fine_residual
                    .map_or(Ok(()), |v| positive("max_fine_residual", v))?;
                p.norm_gap_tolerance
                    .map_or(Ok(()), |v| positive("norm_gap_tolerance", v))
            }
            Command::StabilityIndex(p) => {
                no_descriptor_grid(&p.patch)?;
                refinement("grid_h", &p.grid_h, 1)?;
                finite("c", p.c)?;
                if p.eigenvalues == 0 {
                    return invalid("eigenvalues must be positive");
                }
                if let Some(r) = p.neg_count {
                    if r.max.is_some_and(|m| m < r.min) {
                        return invalid("neg_count.max is below neg_count.min");
                    }
                }
                if let Some(ratio) = p.min_mu_ratio {
                    positive("min_mu_ratio", ratio)?;
                    if p.grid_h.len() < 2 {
                        return invalid("min_mu_ratio needs at least two grid levels");
                    }
                }
                if let Some(l) = &p.lemma32 {
                    l.profile.validate()?;
                    base_point(&l.base_point, p.patch.n)?;
                }
                Ok(())
            }
            Command::Growth(p) => {
                single_grid(&p.patch, p.grid_h)?;
                base_point(&p.base_point, p.patch.n)?;
                increasing("radii", &p.radii)?;
                if let Some(b) = &p.bound {
                    if b.thetas.is_empty() || b.thetas.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
                        return invalid("bound.thetas must be nonempty and lie in (0, 1)");
                    }
                    increasing("bound.radii", &b.radii)?;
                }
                Ok(())
            }
            Command::Audit(p) => {
                if p.spectra.is_empty() && p.random.is_none() {
                    return invalid("audit needs explicit spectra or a random block");
                }
                for s in &p.spectra {
                    if s.len() < 2 || s.iter().any(|v| !v.is_finite()) {
                        return invalid(format!(
                            "spectrum {s:?} must have at least two finite entries"
                        ));
                    }
                }
                if let Some(r) = &p.random {
                    dims("random.dims", &r.dims, 2)?;
                    if r.samples == 0 {
                        return invalid("random.samples must be positive");
                    }
                }
                Ok(())
            }
        }
    }

    /// Checks this configuration runs, with their default modes.
    pub fn declared_checks(&self) -> Vec<(&'static str, CheckMode)> {
        use CheckMode::*;
        let mut v = Vec::new();
        match self {
            Command::Identities(_) => {
                v.extend([
                    ("trace_identities", Asserted),
                    ("elem_sym_brute_force", Asserted),
                    ("ssy_identity", Asserted),
                    ("ssy_nonnegative", Asserted),
                    ("maclaurin", Asserted),
                ]);
            }
            Command::Curvature(p) => {
                if p.divform.is_some() {
                    v.push(("s1_divform_order", Asserted));
                }
            }
            Command::Reilly(p) => {
                v.push(("reilly_order", Asserted));
                if p.max_fine_residual.is_some() {
                    v.push(("reilly_fine_residual", Asserted));
                }
            }
            Command::Eqn16(p) => {
                v.push(("identity_order", Asserted));
                if p.max_fine_residual.is_some() {
                    v.push(("identity_fine_residual", Asserted));
                }
                if p.norm_gap_tolerance.is_some() {
                    v.push(("norm_gap", Asserted));
                }
            }
            Command::StabilityIndex(p) => {
                if p.neg_count.is_some() {
                    v.push(("neg_count", Asserted));
                }
                if p.min_mu_ratio.is_some() {
                    v.push(("mu_min_ratio", Asserted));
                }
                if p.lemma32.is_some() {
                    v.push(("lemma32_certificate", ReportOnly));
                }
            }
            Command::Growth(p) => {
                v.push(("monotone", Asserted));
                if p.bound.is_some() {
                    v.push(("growth_bound", Asserted));
                }
            }
            Command::Audit(_) => {
                v.extend([
                    ("estima_weak", Asserted),
                    ("estima_strong", ReportOnly),
                    ("maclaurin", Asserted),
                ]);
            }
        }
        v
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        invalid(format!("{name} must be finite"))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        invalid(format!("{name} must be positive, got {v}"))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        invalid(format!("{name} must be nonnegative, got {v}"))
    }
}

fn dims(name: &str, list: &[usize], min: usize) -> Result<()> {
    if list.is_empty() || list.iter().any(|&n| n < min) {
        return invalid(format!("{name} must be nonempty with every entry >= {min}"));
    }
    Ok(())
}

fn refinement(name: &str, list: &[f64], min_len: usize) -> Result<()> {
    if list.len() < min_len {
        return invalid(format!("{name} needs at least {min_len} entries"));
    }
    for &v in list {
        positive(name, v)?;
    }
    if list.windows(2).any(|w| w[1] >= w[0]) {
        return invalid(format!("{name} must be strictly decreasing, got {list:?}"));
    }
    Ok(())
}

fn increasing(name: &str, list: &[f64]) -> Result<()> {
    if list.is_empty() {
        return invalid(format!("{name} must be nonempty"));
    }
    for &v in list {
        positive(name, v)?;
    }
    if list.windows(2).any(|w| w[1] <= w[0]) {
        return invalid(format!("{name} must be strictly increasing, got {list:?}"));
    }
    Ok(())
}

fn no_descriptor_grid(patch: &PatchDescriptor) -> Result<()> {
    if patch.grid_h.is_some() {
        return invalid(
            "refinement commands take grid spacings from params.grid_h; remove patch.grid_h",
        );
    }
    Ok(())
}

fn single_grid(patch: &PatchDescriptor, grid_h: Option<f64>) -> Result<()> {
    match (patch.grid_h, grid_h) {
        (Some(_), Some(_)) => invalid("grid spacing given twice (patch.grid_h and params.grid_h)"),
        (None, None) => invalid("grid spacing missing: set params.grid_h or patch.grid_h"),
        (Some(h), None) | (None, Some(h)) => positive("grid_h", h),
    }
}

/// Grid spacing for single-grid commands; validated beforehand.
pub fn grid_spacing(patch: &PatchDescriptor, grid_h: Option<f64>) -> f64 {
    grid_h.or(patch.grid_h).expect("validated grid spacing")
}

fn base_point(p: &Option<Vec<f64>>, n: usize) -> Result<()> {
    match p {
        Some(x) if x.len() != n || x.iter().any(|v| !v.is_finite()) => {
            invalid(format!("base_point must have {n} finite coordinates"))
        }
        _ => Ok(()),
    }
}
