//! Pointwise algebra of principal curvatures.
//!
//! Everything here is exact at a point: elementary symmetric functions
//! `S_r` of the principal curvatures, their normalized versions `H_r`, the
//! Newton transformations `P_r`, the classical trace identities, and the
//! inequality audits built on top of them.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Error, Result};

/// Relative tolerance for the trace identities.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Absolute slack granted to semidefiniteness tests (scaled by the spectrum size).
pub const PSD_SLACK: f64 = 1e-12;
/// Largest relative asymmetry accepted before a matrix is rejected.
pub const ASYMMETRY_TOL: f64 = 1e-8;

/// Ordered principal curvatures `λ₁ ≤ … ≤ λ_n` at a point (or any list the
/// caller supplies, in the caller's order).
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalSpectrum {
    lambda: Vec<f64>,
}

impl PrincipalSpectrum {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.len() < 2 {
            return invalid(format!(
                "dimension must be at least 2, got {}",
                lambda.len()
            ));
        }
        if lambda.iter().any(|l| !l.is_finite()) {
            return invalid("principal curvatures must be finite");
        }
        Ok(Self { lambda })
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.lambda
    }

    pub fn max_abs(&self) -> f64 {
        self.lambda.iter().fold(0.0_f64, |m, l| m.max(l.abs()))
    }
}

/// Symmetric shape operator expressed in an orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeOperator {
    m: DMatrix<f64>,
}

impl ShapeOperator {
    /// Symmetrizes `m`; rejects matrices whose asymmetry exceeds
    /// [`ASYMMETRY_TOL`] relative to their largest entry.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return invalid(format!(
                "shape operator must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            ));
        }
        if m.nrows() < 2 {
            return invalid(format!("dimension must be at least 2, got {}", m.nrows()));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return invalid("shape operator entries must be finite");
        }
        let scale = m.amax();
        let asym = (&m - m.transpose()).amax();
        if asym > ASYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) && asym > 0.0 {
            return invalid(format!(
                "asymmetry {asym:.3e} exceeds tolerance (scale {scale:.3e})"
            ));
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(Self { m: sym })
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(
            entries,
        )))
    }

    pub fn from_spectrum(spec: &PrincipalSpectrum) -> Self {
        Self {
            m: DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(spec.values())),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn negated(&self) -> Self {
        Self { m: -&self.m }
    }

    /// Principal curvatures in ascending order.
    pub fn spectrum(&self) -> PrincipalSpectrum {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.m.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        PrincipalSpectrum { lambda: ev }
    }

    pub fn curvatures(&self) -> CurvatureVector {
        elem_sym(&self.spectrum())
    }
}

/// `S₀..S_n` and `H₀..H_n` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureVector {
    s: Vec<f64>,
    h: Vec<f64>,
}

impl CurvatureVector {
    pub fn dim(&self) -> usize {
        self.s.len() - 1
    }

    /// `S_r`, zero for `r > n`.
    pub fn s(&self, r: usize) -> f64 {
        self.s.get(r).copied().unwrap_or(0.0)
    }

    /// `H_r = S_r / C(n, r)`, zero for `r > n`.
    pub fn h(&self, r: usize) -> f64 {
        self.h.get(r).copied().unwrap_or(0.0)
    }

    pub fn s_values(&self) -> &[f64] {
        &self.s
    }

    pub fn h_values(&self) -> &[f64] {
        &self.h
    }
}

pub fn binomial(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    let r = r.min(n - r);
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficients of `∏(t + λ_i)`: entry `r` is the `r`-th elementary
/// symmetric function of `values`.
pub fn elementary_symmetric(values: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; values.len() + 1];
    e[0] = 1.0;
    for (i, &l) in values.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] += l * e[k - 1];
        }
    }
    e
}

pub fn elem_sym(spec: &PrincipalSpectrum) -> CurvatureVector {
    let n = spec.dim();
    let s = elementary_symmetric(spec.values());
    let h = s
        .iter()
        .enumerate()
        .map(|(r, v)| v / binomial(n, r))
        .collect();
    CurvatureVector { s, h }
}

/// Newton transformation `P_r` of a shape operator.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOperator {
    r: usize,
    m: DMatrix<f64>,
}

impl NewtonOperator {
    pub fn order(&self) -> usize {
        self.r
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.m.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// All Newton transformations `P₀..P_n` by `P₀ = I`, `P_r = S_r I − A P_{r−1}`.
pub fn newton_sequence(a: &ShapeOperator) -> Vec<NewtonOperator> {
    let s = a.curvatures();
    let n = a.dim();
    let id = DMatrix::<f64>::identity(n, n);
    let mut out = Vec::with_capacity(n + 1);
    let mut p = id.clone();
    out.push(NewtonOperator { r: 0, m: p.clone() });
    for r in 1..=n {
        let next = &id * s.s(r) - a.matrix() * &p;
        p = (&next + next.transpose()) * 0.5;
        out.push(NewtonOperator { r, m: p.clone() });
    }
    out
}

pub fn newton_operator(a: &ShapeOperator, r: usize) -> Result<NewtonOperator> {
    if r > a.dim() {
        return invalid(format!("order {r} exceeds dimension {}", a.dim()));
    }
    Ok(newton_sequence(a).swap_remove(r))
}

/// Normalized residuals of the three trace identities for `P_r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceResiduals {
    /// `trace(P_r)` against `(n − r) S_r`.
    pub trace_p: f64,
    /// `trace(A P_r)` against `(r + 1) S_{r+1}`.
    pub trace_ap: f64,
    /// `trace(A² P_r)` against `S₁ S_{r+1} − (r + 2) S_{r+2}`.
    pub trace_a2p: f64,
}

impl TraceResiduals {
    pub fn max(&self) -> f64 {
        self.trace_p.max(self.trace_ap).max(self.trace_a2p)
    }
}

pub fn trace_identity_report(a: &ShapeOperator, r: usize) -> Result<TraceResiduals> {
    let n = a.dim();
    if r + 2 > n {
        return invalid(format!("order {r} must satisfy r <= n - 2 = {}", n - 2));
    }
    let s = a.curvatures();
    let p = newton_operator(a, r)?;
    let ap = a.matrix() * p.matrix();
    let a2p = a.matrix() * &ap;
    let rel = |got: f64, want: f64| (got - want).abs() / (1.0 + want.abs());
    Ok(TraceResiduals {
        trace_p: rel(p.trace(), (n - r) as f64 * s.s(r)),
        trace_ap: rel(ap.trace(), (r + 1) as f64 * s.s(r + 1)),
        trace_a2p: rel(
            a2p.trace(),
            s.s(1) * s.s(r + 1) - (r + 2) as f64 * s.s(r + 2),
        ),
    })
}

/// One inequality `lhs ≥ rhs`, recorded as `slack = lhs − rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inequality {
    pub slack: f64,
    pub tolerance: f64,
}

impl Inequality {
    pub fn holds(&self) -> bool {
        self.slack >= -self.tolerance
    }
}

/// Newton–Maclaurin checks used for curvature integral estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaclaurinReport {
    /// `S₂ ≥ 0` and `S₁ > 0`. When false nothing beyond `newton` is asserted.
    pub hypotheses_met: bool,
    /// `H₁² ≥ H₂`, valid for every real spectrum.
    pub newton: Inequality,
    /// `H₁ H₂ ≥ H₃`.
    pub h1h2_over_h3: Inequality,
    /// `H₁ ≥ H₂^{1/2}`.
    pub h1_over_sqrt_h2: Inequality,
    /// `(n − 2)/n · S₁ S₂ ≥ 3 S₃`.
    pub cubic: Inequality,
    /// `S₁ ≥ (2n/(n − 1))^{1/2} S₂^{1/2}`.
    pub root: Inequality,
}

impl MaclaurinReport {
    /// Number of failing inequalities among the four conditional ones
    /// (zero when the hypotheses are not met).
    pub fn violations(&self) -> usize {
        if !self.hypotheses_met {
            return 0;
        }
        [
            self.h1h2_over_h3,
            self.h1_over_sqrt_h2,
            self.cubic,
            self.root,
        ]
        .iter()
        .filter(|i| !i.holds())
        .count()
    }
}

pub fn maclaurin_check(spec: &PrincipalSpectrum) -> MaclaurinReport {
    let n = spec.dim();
    let nf = n as f64;
    let cv = elem_sym(spec);
    let abs: Vec<f64> = spec.values().iter().map(|l| l.abs()).collect();
    // rounding in S_r is bounded by the same sums over |λ|
    let sa = elementary_symmetric(&abs);
    let sa_at = |r: usize| sa.get(r).copied().unwrap_or(0.0);
    let ha = |r: usize| sa_at(r) / binomial(n, r).max(1.0);
    let tol = |mag: f64| PSD_SLACK * (1.0 + mag);

    let (s1, s2, s3) = (cv.s(1), cv.s(2), cv.s(3));
    let (h1, h2, h3) = (cv.h(1), cv.h(2), cv.h(3));
    let hypotheses_met = s2 >= 0.0 && s1 > 0.0;

    let newton = Inequality {
        slack: h1 * h1 - h2,
        tolerance: tol(ha(1) * ha(1) + ha(2)),
    };
    let h1h2_over_h3 = Inequality {
        slack: h1 * h2 - h3,
        tolerance: tol(ha(1) * ha(2) + ha(3)),
    };
    // a − √b written as (a² − b)/(a + √b) to avoid cancellation at equality
    let root_slack = |a: f64, b: f64| {
        if b < 0.0 {
            f64::NAN
        } else if a + b.sqrt() > 0.0 {
            (a * a - b) / (a + b.sqrt())
        } else {
            a - b.sqrt()
        }
    };
    let h1_over_sqrt_h2 = Inequality {
        slack: root_slack(h1, h2),
        tolerance: tol(ha(1)),
    };
    let cubic = Inequality {
        slack: (nf - 2.0) / nf * s1 * s2 - 3.0 * s3,
        tolerance: tol(sa_at(1) * sa_at(2) + 3.0 * sa_at(3)),
    };
    let root = Inequality {
        slack: root_slack(s1, 2.0 * nf / (nf - 1.0) * s2),
        tolerance: tol(sa_at(1)),
    };
    MaclaurinReport {
        hypotheses_met,
        newton,
        h1h2_over_h3,
        h1_over_sqrt_h2,
        cubic,
        root,
    }
}

/// Outcome of comparing `⟨P₁ v, v⟩` with `S₁|v|²` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimaAudit {
    /// `P₁` is not positive semidefinite; nothing is evaluated.
    NotPsd { min_eigenvalue: f64 },
    Evaluated {
        s1: f64,
        max_eigenvalue: f64,
        /// Largest eigenvalue of `P₁` is at most `S₁`.
        strong_holds: bool,
        /// Largest eigenvalue of `P₁` is at most `(n − 1) S₁` (trace bound).
        weak_holds: bool,
    },
}

/// Eigenvalues `S₁ − λ_i` of `P₁`, in the order of the spectrum.
pub fn p1_eigenvalues(spec: &PrincipalSpectrum) -> Vec<f64> {
    let s1: f64 = spec.values().iter().sum();
    spec.values().iter().map(|l| s1 - l).collect()
}

fn psd_slack(spec: &PrincipalSpectrum) -> f64 {
    PSD_SLACK * (1.0 + spec.values().iter().map(|l| l.abs()).sum::<f64>())
}

pub fn p1_is_psd(spec: &PrincipalSpectrum) -> bool {
    let slack = psd_slack(spec);
    p1_eigenvalues(spec).iter().all(|&e| e >= -slack)
}

pub fn estima_audit(spec: &PrincipalSpectrum) -> EstimaAudit {
    let slack = psd_slack(spec);
    let eig = p1_eigenvalues(spec);
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -slack {
        return EstimaAudit::NotPsd {
            min_eigenvalue: min,
        };
    }
    let s1: f64 = spec.values().iter().sum();
    let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let n = spec.dim() as f64;
    EstimaAudit::Evaluated {
        s1,
        max_eigenvalue: max,
        strong_holds: max <= s1 + slack,
        weak_holds: max <= (n - 1.0) * s1 + n * slack,
    }
}

/// Shape operator together with the sign applied to reach it.
#[derive(Debug, Clone, PartialEq)]
pub struct Oriented {
    pub shape: ShapeOperator,
    pub flipped: bool,
}

/// Returns `A` or `−A`, whichever has positive semidefinite `P₁`. The input
/// is never modified; callers see whether a flip was needed.
pub fn orient_p1_psd(a: &ShapeOperator) -> Result<Oriented> {
    let spec = a.spectrum();
    if p1_is_psd(&spec) {
        return Ok(Oriented {
            shape: a.clone(),
            flipped: false,
        });
    }
    let neg = a.negated();
    if p1_is_psd(&neg.spectrum()) {
        return Ok(Oriented {
            shape: neg,
            flipped: true,
        });
    }
    Err(Error::PreconditionViolation(
        "P1 is indefinite for both orientations".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force(values: &[f64]) -> Vec<f64> {
        let n = values.len();
        let mut s = vec![0.0; n + 1];
        for mask in 0u32..(1 << n) {
            let prod: f64 = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| values[i])
                .product();
            s[mask.count_ones() as usize] += prod;
        }
        s
    }

    fn spec(v: &[f64]) -> PrincipalSpectrum {
        PrincipalSpectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn elem_sym_examples() {
        let cv = elem_sym(&spec(&[1.0, 1.0, 1.0]));
        assert_eq!(cv.s_values(), &[1.0, 3.0, 3.0, 1.0]);
        assert_eq!(cv.h_values(), &[1.0, 1.0, 1.0, 1.0]);

        let cv = elem_sym(&spec(&[2.5, 0.0, 0.0]));
        assert_eq!((cv.s(1), cv.s(2), cv.s(3)), (2.5, 0.0, 0.0));

        let v = [1.0, 2.0, 3.0, 4.0];
        let oracle = brute_force(&v);
        assert_eq!(oracle[2..], [35.0, 50.0, 24.0]);
        let cv = elem_sym(&spec(&v));
        assert_eq!(&cv.s_values()[2..], &oracle[2..]);
    }

    #[test]
    fn rejects_small_or_nonfinite_spectra() {
        assert!(PrincipalSpectrum::new(vec![1.0]).is_err());
        assert!(PrincipalSpectrum::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn elem_sym_matches_subset_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=8 {
            for _ in 0..50 {
                let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let oracle = brute_force(&v);
                let abs_oracle = brute_force(&v.iter().map(|x| x.abs()).collect::<Vec<_>>());
                let cv = elem_sym(&spec(&v));
                for r in 0..=n {
                    assert!((cv.s(r) - oracle[r]).abs() <= 1e-12 * (1.0 + abs_oracle[r]));
                }
            }
        }
    }

    #[test]
    fn newton_examples() {
        let a = ShapeOperator::diagonal(&[0.3, -1.0, 2.0]).unwrap();
        let p0 = newton_operator(&a, 0).unwrap();
        assert_eq!(p0.matrix(), &DMatrix::identity(3, 3));

        let a = ShapeOperator::diagonal(&[1.0, 1.0, 1.0]).unwrap();
        let p1 = newton_operator(&a, 1).unwrap();
        assert_eq!(p1.matrix(), &(DMatrix::identity(3, 3) * 2.0));

        let a = ShapeOperator::diagonal(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let p1 = newton_operator(&a, 1).unwrap();
        assert_eq!(p1.eigenvalues(), vec![6.0, 7.0, 8.0, 9.0]);

        assert!(newton_operator(&a, 5).is_err());
    }

    #[test]
    fn newton_sequence_terminates_at_zero() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, -0.2, 0.5, -2.0, 0.3, -0.2, 0.3, 0.7]);
        let a = ShapeOperator::new(m).unwrap();
        let seq = newton_sequence(&a);
        assert!(seq[3].matrix().amax() < 1e-12);
        assert!(seq[3].trace().abs() < 1e-12);
    }

    #[test]
    fn trace_identity_examples() {
        let a = ShapeOperator::diagonal(&[1.0, 1.0, 1.0]).unwrap();
        let r = trace_identity_report(&a, 1).unwrap();
        assert_eq!(r.max(), 0.0);

        let flat = ShapeOperator::new(DMatrix::zeros(4, 4)).unwrap();
        for r in 0..=2 {
            assert_eq!(trace_identity_report(&flat, r).unwrap().max(), 0.0);
        }

        let a = ShapeOperator::diagonal(&[2.0, 2.0, -1.0]).unwrap();
        let p1 = newton_operator(&a, 1).unwrap();
        let t = (a.matrix() * a.matrix() * p1.matrix()).trace();
        assert!((t - 12.0).abs() < 1e-12);
        assert_eq!(trace_identity_report(&a, 1).unwrap().max(), 0.0);

        assert!(trace_identity_report(&a, 2).is_err());
    }

    #[test]
    fn symmetrizes_and_rejects_asymmetric_input() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5 + 1e-12, 0.5, 2.0]);
        let a = ShapeOperator::new(m).unwrap();
        assert_eq!(a.matrix()[(0, 1)], a.matrix()[(1, 0)]);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.6, 0.5, 2.0]);
        assert!(ShapeOperator::new(bad).is_err());
    }

    #[test]
    fn maclaurin_examples() {
        let rep = maclaurin_check(&spec(&[1.0, 1.0, 1.0]));
        assert!(rep.hypotheses_met);
        assert!(rep.h1h2_over_h3.slack.abs() < 1e-15);
        assert!(rep.root.slack.abs() < 1e-15);
        assert_eq!(rep.violations(), 0);

        let rep = maclaurin_check(&spec(&[0.7, 0.0, 0.0]));
        assert!(rep.hypotheses_met);
        assert!((rep.root.slack - 0.7).abs() < 1e-15);
        assert_eq!(rep.violations(), 0);

        // S₂ < 0: nothing conditional is asserted
        let rep = maclaurin_check(&spec(&[3.0, -1.0, 0.0]));
        assert!(!rep.hypotheses_met);
        assert_eq!(rep.violations(), 0);
        assert!(rep.newton.holds());
    }

    #[test]
    fn estima_examples() {
        match estima_audit(&spec(&[1.0, 1.0, 1.0])) {
            EstimaAudit::Evaluated {
                max_eigenvalue,
                strong_holds,
                ..
            } => {
                assert_eq!(max_eigenvalue, 2.0);
                assert!(strong_holds);
            }
            other => panic!("{other:?}"),
        }
        match estima_audit(&spec(&[2.0, 2.0, -1.0])) {
            EstimaAudit::Evaluated {
                s1,
                max_eigenvalue,
                strong_holds,
                weak_holds,
            } => {
                assert_eq!((s1, max_eigenvalue), (3.0, 4.0));
                assert!(!strong_holds);
                assert!(weak_holds);
            }
            other => panic!("{other:?}"),
        }
        match estima_audit(&spec(&[1.5, 0.0, 0.0])) {
            EstimaAudit::Evaluated {
                s1,
                max_eigenvalue,
                strong_holds,
                ..
            } => {
                assert_eq!(s1, max_eigenvalue);
                assert!(strong_holds);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            estima_audit(&spec(&[1.0, -3.0, 0.5])),
            EstimaAudit::NotPsd { .. }
        ));
    }

    #[test]
    fn orientation_helper_flips_explicitly() {
        let a = ShapeOperator::diagonal(&[-2.0, -2.0, 1.0]).unwrap();
        let o = orient_p1_psd(&a).unwrap();
        assert!(o.flipped);
        assert_eq!(o.shape.matrix()[(0, 0)], 2.0);
        let b = ShapeOperator::diagonal(&[1.0, 1.0, 1.0]).unwrap();
        assert!(!orient_p1_psd(&b).unwrap().flipped);
        let c = ShapeOperator::diagonal(&[1.0, -1.0, 0.0]).unwrap();
        assert!(orient_p1_psd(&c).is_err());
    }

    #[test]
    fn newton_inequality_unconditional() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let n = rng.gen_range(2..=8);
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            assert!(maclaurin_check(&spec(&v)).newton.holds());
        }
    }
}
