//! Surface patches: graphs `x ↦ (x, u(x))` and analytic charts, together with
//! their derivative oracle and JSON descriptors.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::jet::{self, Jet};
use crate::error::{invalid, Error, Result};

/// Parameter domain of a patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl Domain {
    pub fn cube(n: usize, half_width: f64) -> Self {
        Domain::Box {
            lo: vec![-half_width; n],
            hi: vec![half_width; n],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { lo, .. } => lo.len(),
            Domain::Ball { center, .. } => center.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::Box { lo, hi } => {
                if lo.len() != hi.len() || lo.is_empty() {
                    return invalid("box bounds must have equal nonzero length");
                }
                if lo
                    .iter()
                    .zip(hi)
                    .any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b))
                {
                    return invalid("box bounds must be finite with lo < hi");
                }
            }
            Domain::Ball { center, radius } => {
                if center.is_empty()
                    || center.iter().any(|c| !c.is_finite())
                    || !(*radius > 0.0 && radius.is_finite())
                {
                    return invalid("ball needs a finite center and positive radius");
                }
            }
        }
        Ok(())
    }

    /// Closed-domain membership with absolute slack `eps`.
    pub fn contains(&self, x: &[f64], eps: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            Domain::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (a, b))| *v >= a - eps && *v <= b + eps),
            Domain::Ball { center, radius } => {
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum();
                d2.sqrt() <= radius + eps
            }
        }
    }

    pub fn center(&self) -> Vec<f64> {
        match self {
            Domain::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect(),
            Domain::Ball { center, .. } => center.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatchKind {
    Graph,
    AnalyticChart,
}

/// How partial derivatives of the defining data are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DerivativeOracle {
    /// Exact partials through jet arithmetic, up to order four.
    Analytic,
    /// Second-order central differences with the given spacing.
    FiniteDifference { step: f64 },
}

/// Profiles `f` for one-variable graphs `u(x) = f(x₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `x₁²`
    Square,
    /// `x₁³`
    Cube,
    /// `sin x₁`
    Sine,
}

impl Profile {
    fn eval(&self, x: &Jet) -> Jet {
        match self {
            Profile::Square => x * x,
            Profile::Cube => x.powi(3),
            Profile::Sine => x.sin(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Profile::Square => "square",
            Profile::Cube => "cube",
            Profile::Sine => "sine",
        }
    }
}

/// Defining data of each builder.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Flat,
    /// Lower hemisphere `u = −√(ρ² − |x|²)`; with the upward normal its
    /// principal curvatures are `+1/ρ`.
    Hemisphere {
        rho: f64,
    },
    OneVariable {
        profile: Profile,
    },
    /// `u = a|x|²`; principal curvatures are positive for `a > 0`.
    Paraboloid {
        a: f64,
    },
    /// Cap of polar angle `polar_limit` about the south pole of the sphere of
    /// radius `rho`, with the normal pointing to the center (`λ_i = +1/ρ`).
    RoundCap {
        rho: f64,
        polar_limit: f64,
    },
}

/// A chart of a hypersurface in `ℝ^{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePatch {
    n: usize,
    domain: Domain,
    kind: PatchKind,
    shape: Shape,
    oracle: DerivativeOracle,
    label: String,
}

impl SurfacePatch {
    pub fn flat(n: usize, domain: Domain) -> Result<Self> {
        check_dim(n)?;
        check_domain(n, &domain)?;
        Ok(Self::graph(n, domain, Shape::Flat, format!("flat(n={n})")))
    }

    /// Lower hemisphere of radius `rho` over the cube `[−fρ, fρ]ⁿ`,
    /// `f = fraction`, which must stay strictly inside the equator.
    pub fn hemisphere_graph(n: usize, rho: f64, fraction: f64) -> Result<Self> {
        check_dim(n)?;
        positive("rho", rho)?;
        positive("fraction", fraction)?;
        if fraction * (n as f64).sqrt() >= 1.0 {
            return invalid(format!("fraction {fraction} puts the cube corners outside the ball (need fraction*sqrt(n) < 1)"));
        }
        let domain = Domain::cube(n, fraction * rho);
        Ok(Self::graph(
            n,
            domain,
            Shape::Hemisphere { rho },
            format!("hemisphere_graph(n={n}, rho={rho}, fraction={fraction})"),
        ))
    }

    pub fn one_variable_graph(profile: Profile, slab: Domain) -> Result<Self> {
        let n = slab.dim();
        check_dim(n)?;
        check_domain(n, &slab)?;
        Ok(Self::graph(
            n,
            slab,
            Shape::OneVariable { profile },
            format!("one_variable_graph(profile={}, n={n})", profile.name()),
        ))
    }

    pub fn paraboloid(n: usize, a: f64, domain: Domain) -> Result<Self> {
        check_dim(n)?;
        check_domain(n, &domain)?;
        if !a.is_finite() {
            return invalid("paraboloid coefficient must be finite");
        }
        Ok(Self::graph(
            n,
            domain,
            Shape::Paraboloid { a },
            format!("paraboloid(n={n}, a={a})"),
        ))
    }

    /// Round cap chart. The parameter box is `[0, π]^{n−1} × [π, 2π]`: nested
    /// spherical angles cover the closed lower hemisphere, and a dilation in
    /// stereographic coordinates maps it onto the cap of the requested polar
    /// angle. The whole box boundary lands on the cap boundary, where the
    /// chart degenerates.
    pub fn round_cap_chart(n: usize, rho: f64, polar_limit: f64) -> Result<Self> {
        check_dim(n)?;
        positive("rho", rho)?;
        if !(polar_limit > 0.0 && polar_limit < PI) {
            return invalid(format!(
                "polar angle limit must lie in (0, pi), got {polar_limit}"
            ));
        }
        let mut lo = vec![0.0; n];
        let mut hi = vec![PI; n];
        lo[n - 1] = PI;
        hi[n - 1] = 2.0 * PI;
        Ok(Self {
            n,
            domain: Domain::Box { lo, hi },
            kind: PatchKind::AnalyticChart,
            shape: Shape::RoundCap { rho, polar_limit },
            oracle: DerivativeOracle::Analytic,
            label: format!("round_cap_chart(n={n}, rho={rho}, polar_limit={polar_limit})"),
        })
    }

    fn graph(n: usize, domain: Domain, shape: Shape, label: String) -> Self {
        Self {
            n,
            domain,
            kind: PatchKind::Graph,
            shape,
            oracle: DerivativeOracle::Analytic,
            label,
        }
    }

    pub fn with_oracle(mut self, oracle: DerivativeOracle) -> Result<Self> {
        if let DerivativeOracle::FiniteDifference { step } = oracle {
            positive("finite-difference step", step)?;
        }
        self.oracle = oracle;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn kind(&self) -> PatchKind {
        self.kind
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn oracle(&self) -> DerivativeOracle {
        self.oracle
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_graph(&self) -> bool {
        self.kind == PatchKind::Graph
    }

    /// Base point used by default for distance-based scans: the domain center
    /// (the south pole for round caps).
    pub fn base_point(&self) -> Vec<f64> {
        self.domain.center()
    }

    /// Immersion `x ↦ X(x) ∈ ℝ^{n+1}` applied to coordinate jets.
    pub fn embed(&self, z: &[Jet]) -> Vec<Jet> {
        match &self.shape {
            Shape::RoundCap { rho, polar_limit } => round_cap(z, *rho, *polar_limit),
            _ => {
                let mut out: Vec<Jet> = z.to_vec();
                out.push(self.height(z));
                out
            }
        }
    }

    fn height(&self, z: &[Jet]) -> Jet {
        match &self.shape {
            Shape::Flat => z[0].constant_like(0.0),
            Shape::Hemisphere { rho } => {
                let r2 = jet::dot(z, z);
                -((&r2 * -1.0) + rho * rho).sqrt()
            }
            Shape::OneVariable { profile } => profile.eval(&z[0]),
            Shape::Paraboloid { a } => jet::dot(z, z) * *a,
            Shape::RoundCap { .. } => unreachable!("charts have no height function"),
        }
    }

    /// Ambient direction the unit normal must have positive component along.
    pub fn normal_hint(&self, position: &[f64]) -> Vec<f64> {
        match self.shape {
            Shape::RoundCap { .. } => position.iter().map(|v| -v).collect(),
            _ => {
                let mut e = vec![0.0; self.n + 1];
                e[self.n] = 1.0;
                e
            }
        }
    }

    /// Jets (order `order`) of the immersion components about `x`.
    pub fn embedding_jets(&self, x: &[f64], order: usize) -> Result<Vec<Jet>> {
        if x.len() != self.n {
            return invalid(format!(
                "point has {} coordinates, patch dimension is {}",
                x.len(),
                self.n
            ));
        }
        match self.oracle {
            DerivativeOracle::Analytic => Ok(self.embed(&Jet::coordinates(x, order))),
            DerivativeOracle::FiniteDifference { step } => {
                if order > 2 {
                    return Err(Error::UnsupportedPrecision(format!(
                        "finite-difference oracle provides derivatives up to order 2, requested {order}"
                    )));
                }
                Ok(self.fd_jets(x, order, step))
            }
        }
    }

    /// Immersion values at a point (no derivatives).
    pub fn position(&self, x: &[f64]) -> Vec<f64> {
        let z = Jet::coordinates(x, 0);
        self.embed(&z).iter().map(Jet::value).collect()
    }

    fn fd_jets(&self, x: &[f64], order: usize, s: f64) -> Vec<Jet> {
        let n = self.n;
        let sp = jet::space(n, order);
        let at = |dx: &[(usize, f64)]| {
            let mut p = x.to_vec();
            for &(i, d) in dx {
                p[i] += d;
            }
            self.position(&p)
        };
        let center = at(&[]);
        let mut coeffs = vec![vec![0.0; sp.len()]; n + 1];
        for c in 0..=n {
            coeffs[c][0] = center[c];
        }
        if order >= 1 {
            for i in 0..n {
                let (p, m) = (at(&[(i, s)]), at(&[(i, -s)]));
                let mut e = vec![0u8; n];
                e[i] = 1;
                let idx1 = sp.index_of(&e).expect("first-order monomial");
                for c in 0..=n {
                    coeffs[c][idx1] = (p[c] - m[c]) / (2.0 * s);
                }
                if order >= 2 {
                    e[i] = 2;
                    let idx2 = sp.index_of(&e).expect("second-order monomial");
                    for c in 0..=n {
                        coeffs[c][idx2] = (p[c] - 2.0 * center[c] + m[c]) / (s * s) / 2.0;
                    }
                    for j in i + 1..n {
                        let pp = at(&[(i, s), (j, s)]);
                        let pm = at(&[(i, s), (j, -s)]);
                        let mp = at(&[(i, -s), (j, s)]);
                        let mm = at(&[(i, -s), (j, -s)]);
                        let mut e2 = vec![0u8; n];
                        e2[i] = 1;
                        e2[j] = 1;
                        let idx = sp.index_of(&e2).expect("mixed monomial");
                        for c in 0..=n {
                            coeffs[c][idx] = (pp[c] - pm[c] - mp[c] + mm[c]) / (4.0 * s * s);
                        }
                    }
                }
            }
        }
        coeffs
            .into_iter()
            .map(|cs| Jet::from_coeffs(&sp, cs))
            .collect()
    }

    pub fn descriptor(&self, grid_h: Option<f64>) -> PatchDescriptor {
        let mut params = Map::new();
        let (kind, domain) = match &self.shape {
            Shape::Flat => ("flat", Some(self.domain.clone())),
            Shape::Hemisphere { rho } => {
                params.insert("rho".into(), Value::from(*rho));
                let frac = match &self.domain {
                    Domain::Box { hi, .. } => hi[0] / rho,
                    Domain::Ball { radius, .. } => radius / rho,
                };
                params.insert("fraction".into(), Value::from(frac));
                ("hemisphere_graph", None)
            }
            Shape::OneVariable { profile } => {
                params.insert("profile".into(), Value::from(profile.name()));
                ("one_variable_graph", Some(self.domain.clone()))
            }
            Shape::Paraboloid { a } => {
                params.insert("a".into(), Value::from(*a));
                ("paraboloid", Some(self.domain.clone()))
            }
            Shape::RoundCap { rho, polar_limit } => {
                params.insert("rho".into(), Value::from(*rho));
                params.insert("polar_limit".into(), Value::from(*polar_limit));
                ("round_cap_chart", None)
            }
        };
        PatchDescriptor {
            kind: kind.to_string(),
            n: self.n,
            domain,
            params,
            grid_h,
            oracle: match self.oracle {
                DerivativeOracle::Analytic => None,
                o => Some(o),
            },
        }
    }
}

fn round_cap(z: &[Jet], rho: f64, polar_limit: f64) -> Vec<Jet> {
    let n = z.len();
    // point on the closed lower unit hemisphere from nested angles
    let mut p = Vec::with_capacity(n + 1);
    let mut sin_prod = z[0].constant_like(1.0);
    for zi in z {
        p.push(&sin_prod * &zi.cos());
        sin_prod = &sin_prod * &zi.sin();
    }
    p.push(sin_prod);
    // dilation y ↦ t·y in stereographic coordinates, t = tan(Θ/2)
    let t = (polar_limit / 2.0).tan();
    let s = &p[n];
    let one_plus = s + 1.0;
    let one_minus = (s * -1.0) + 1.0;
    let denom = &(&one_plus * (t * t)) + &one_minus;
    let inv = denom.recip();
    let mut out: Vec<Jet> = p[..n]
        .iter()
        .map(|pi| &(pi * &inv) * (2.0 * t * rho))
        .collect();
    out.push(&(&(&one_plus * (t * t)) - &one_minus) * &inv * rho);
    out
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return invalid(format!("patch dimension must be at least 2, got {n}"));
    }
    Ok(())
}

fn check_domain(n: usize, domain: &Domain) -> Result<()> {
    domain.validate()?;
    if domain.dim() != n {
        return invalid(format!(
            "domain dimension {} does not match n = {n}",
            domain.dim()
        ));
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return invalid(format!("{name} must be positive and finite, got {v}"));
    }
    Ok(())
}

/// Serializable description of a patch: `{kind, n, domain, params, grid_h}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchDescriptor {
    pub kind: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<DerivativeOracle>,
}

impl PatchDescriptor {
    fn num(&self, key: &str) -> Result<f64> {
        match self.params.get(key) {
            Some(Value::Number(v)) => v
                .as_f64()
                .ok_or_else(|| Error::InvalidInput(format!("parameter {key} is not a float"))),
            Some(_) => invalid(format!("parameter {key} must be a number")),
            None => invalid(format!("builder {} requires parameter {key}", self.kind)),
        }
    }

    fn domain(&self) -> Result<Domain> {
        self.domain.clone().ok_or_else(|| {
            Error::InvalidInput(format!("builder {} requires an explicit domain", self.kind))
        })
    }

    fn allow_params(&self, keys: &[&str]) -> Result<()> {
        for k in self.params.keys() {
            if !keys.contains(&k.as_str()) {
                return invalid(format!("unknown parameter {k} for builder {}", self.kind));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<SurfacePatch> {
        let patch = match self.kind.as_str() {
            "flat" => {
                self.allow_params(&[])?;
                SurfacePatch::flat(self.n, self.domain()?)?
            }
            "hemisphere_graph" => {
                self.allow_params(&["rho", "fraction"])?;
                SurfacePatch::hemisphere_graph(self.n, self.num("rho")?, self.num("fraction")?)?
            }
            "one_variable_graph" => {
                self.allow_params(&["profile"])?;
                let profile: Profile = match self.params.get("profile") {
                    Some(v) => serde_json::from_value(v.clone())
                        .map_err(|e| Error::InvalidInput(format!("bad profile: {e}")))?,
                    None => return invalid("one_variable_graph requires parameter profile"),
                };
                let p = SurfacePatch::one_variable_graph(profile, self.domain()?)?;
                if p.dim() != self.n {
                    return invalid(format!(
                        "slab dimension {} does not match n = {}",
                        p.dim(),
                        self.n
                    ));
                }
                p
            }
            "paraboloid" => {
                self.allow_params(&["a"])?;
                SurfacePatch::paraboloid(self.n, self.num("a")?, self.domain()?)?
            }
            "round_cap_chart" => {
                self.allow_params(&["rho", "polar_limit"])?;
                SurfacePatch::round_cap_chart(self.n, self.num("rho")?, self.num("polar_limit")?)?
            }
            other => return invalid(format!("unknown builder {other}")),
        };
        if matches!(self.kind.as_str(), "hemisphere_graph" | "round_cap_chart")
            && self.domain.is_some()
        {
            return invalid(format!(
                "builder {} derives its own domain; remove the domain field",
                self.kind
            ));
        }
        match self.oracle {
            Some(o) => patch.with_oracle(o),
            None => Ok(patch),
        }
    }
}

/// One entry of the builder catalog.
#[derive(Debug, Clone, Serialize)]
pub struct BuilderInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub needs_domain: bool,
    pub params: Vec<ParamInfo>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamInfo {
    pub name: &'static str,
    #[serde(rename = "type")]
    pub ty: &'static str,
    pub description: &'static str,
}

pub fn builder_catalog() -> Vec<BuilderInfo> {
    let p = |name, ty, description| ParamInfo {
        name,
        ty,
        description,
    };
    vec![
        BuilderInfo {
            name: "flat",
            summary: "hyperplane u = 0 over a box",
            needs_domain: true,
            params: vec![],
        },
        BuilderInfo {
            name: "hemisphere_graph",
            summary: "lower hemisphere u = -sqrt(rho^2 - |x|^2) over [-fraction*rho, fraction*rho]^n; principal curvatures +1/rho",
            needs_domain: false,
            params: vec![
                p("rho", "number", "sphere radius (> 0)"),
                p("fraction", "number", "cube half-width over rho; fraction*sqrt(n) < 1"),
            ],
        },
        BuilderInfo {
            name: "one_variable_graph",
            summary: "cylinder graph u = f(x1) over a slab",
            needs_domain: true,
            params: vec![p("profile", "string", "one of square (x1^2), cube (x1^3), sine (sin x1)")],
        },
        BuilderInfo {
            name: "paraboloid",
            summary: "u = a|x|^2 over a box",
            needs_domain: true,
            params: vec![p("a", "number", "quadratic coefficient")],
        },
        BuilderInfo {
            name: "round_cap_chart",
            summary: "spherical cap about the south pole, chart over [0,pi]^(n-1) x [pi,2pi]; normal toward the center",
            needs_domain: false,
            params: vec![
                p("rho", "number", "sphere radius (> 0)"),
                p("polar_limit", "number", "polar angle of the cap boundary, in (0, pi)"),
            ],
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_cap_maps_box_onto_cap() {
        let rho = 1.5;
        for &theta in &[PI / 2.0 - 0.2, PI / 2.0, 2.4] {
            let p = SurfacePatch::round_cap_chart(3, rho, theta).unwrap();
            // center of the box is the south pole
            let c = p.position(&p.base_point());
            assert!(c[..3].iter().all(|v| v.abs() < 1e-12));
            assert!((c[3] + rho).abs() < 1e-12);
            // boundary faces land on the cap boundary x₄ = −ρ cos Θ
            for x in [
                [0.0, 1.0, 4.0],
                [1.2, PI, 3.5],
                [0.4, 2.0, PI],
                [2.0, 0.7, 2.0 * PI],
            ] {
                let q = p.position(&x);
                let r: f64 = q.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((r - rho).abs() < 1e-12);
                assert!((q[3] + rho * theta.cos()).abs() < 1e-12, "{q:?}");
            }
            // interior points stay on the sphere, strictly inside the cap
            let q = p.position(&[1.0, 2.0, 4.0]);
            let r: f64 = q.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((r - rho).abs() < 1e-12);
            assert!(q[3] < -rho * theta.cos());
        }
    }

    #[test]
    fn descriptor_round_trip() {
        let patches = vec![
            SurfacePatch::flat(2, Domain::cube(2, 1.0)).unwrap(),
            SurfacePatch::hemisphere_graph(3, 2.0, 0.5).unwrap(),
            SurfacePatch::one_variable_graph(Profile::Sine, Domain::cube(3, 0.5)).unwrap(),
            SurfacePatch::paraboloid(2, 0.7, Domain::cube(2, 2.0)).unwrap(),
            SurfacePatch::round_cap_chart(3, 1.0, 1.2).unwrap(),
        ];
        for p in patches {
            let d = p.descriptor(Some(0.1));
            let text = serde_json::to_string(&d).unwrap();
            let back: PatchDescriptor = serde_json::from_str(&text).unwrap();
            assert_eq!(back.build().unwrap(), p);
        }
    }

    #[test]
    fn descriptor_validation() {
        let bad: PatchDescriptor =
            serde_json::from_str(r#"{"kind":"hemisphere_graph","n":3,"params":{"rho":2.0}}"#)
                .unwrap();
        assert!(matches!(bad.build(), Err(Error::InvalidInput(_))));
        let bad: PatchDescriptor = serde_json::from_str(r#"{"kind":"torus","n":3}"#).unwrap();
        assert!(bad.build().is_err());
        let bad: PatchDescriptor =
            serde_json::from_str(r#"{"kind":"paraboloid","n":2,"params":{"a":1.0,"b":2.0},"domain":{"box":{"lo":[-1,-1],"hi":[1,1]}}}"#).unwrap();
        assert!(bad.build().is_err());
        assert!(SurfacePatch::hemisphere_graph(3, 2.0, 0.6).is_err());
        assert!(SurfacePatch::round_cap_chart(3, 1.0, PI).is_err());
    }

    #[test]
    fn finite_difference_jets_track_analytic_ones() {
        let p = SurfacePatch::paraboloid(2, 0.8, Domain::cube(2, 1.0)).unwrap();
        let x = [0.3, -0.2];
        let exact = p.embedding_jets(&x, 2).unwrap();
        let fd = p
            .clone()
            .with_oracle(DerivativeOracle::FiniteDifference { step: 1e-3 })
            .unwrap();
        let approx = fd.embedding_jets(&x, 2).unwrap();
        for (a, b) in exact.iter().zip(&approx) {
            for (u, v) in a.coeffs().iter().zip(b.coeffs()) {
                assert!((u - v).abs() < 1e-6);
            }
        }
        assert!(matches!(
            fd.embedding_jets(&x, 3),
            Err(Error::UnsupportedPrecision(_))
        ));
    }
}
