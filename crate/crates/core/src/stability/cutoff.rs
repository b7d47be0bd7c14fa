//! Piecewise-linear radial cutoff functions.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CutoffProfile {
    /// 1 on `[0, R]`, `(2R − r)/R` on `[R, 2R]`, 0 beyond.
    Theorem31 { radius: f64 },
    /// Same shape as `Theorem31`.
    Lemma32Simple { radius: f64 },
    /// 0 on `[0, R₀)`, `r − R₀` on `[R₀, R₀+1]`, 1 up to `R+R₀+1`, then
    /// `(2R+R₀+1 − r)/R` down to 0 at `2R+R₀+1`.
    Lemma32Outside { inner_radius: f64, radius: f64 },
}

impl CutoffProfile {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        match *self {
            CutoffProfile::Theorem31 { radius } | CutoffProfile::Lemma32Simple { radius }
                if !ok(radius) =>
            {
                invalid(format!("cutoff radius must be positive, got {radius}"))
            }
            CutoffProfile::Lemma32Outside {
                inner_radius,
                radius,
            } if !ok(inner_radius) || !ok(radius) => invalid(format!(
                "cutoff radii must be positive, got R0 = {inner_radius}, R = {radius}"
            )),
            _ => Ok(()),
        }
    }

    /// Radius beyond which the profile vanishes.
    pub fn support_radius(&self) -> f64 {
        match *self {
            CutoffProfile::Theorem31 { radius } | CutoffProfile::Lemma32Simple { radius } => {
                2.0 * radius
            }
            CutoffProfile::Lemma32Outside {
                inner_radius,
                radius,
            } => 2.0 * radius + inner_radius + 1.0,
        }
    }

    /// Value at distance `r ≥ 0`; the profile must already be valid.
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            CutoffProfile::Theorem31 { radius } | CutoffProfile::Lemma32Simple { radius } => {
                if r <= radius {
                    1.0
                } else if r <= 2.0 * radius {
                    (2.0 * radius - r) / radius
                } else {
                    0.0
                }
            }
            CutoffProfile::Lemma32Outside {
                inner_radius: r0,
                radius,
            } => {
                if r < r0 {
                    0.0
                } else if r <= r0 + 1.0 {
                    r - r0
                } else if r <= radius + r0 + 1.0 {
                    1.0
                } else if r <= 2.0 * radius + r0 + 1.0 {
                    (2.0 * radius + r0 + 1.0 - r) / radius
                } else {
                    0.0
                }
            }
        }
    }
}

pub fn cutoff_eval(profile: &CutoffProfile, r: f64) -> Result<f64> {
    profile.validate()?;
    if !(r >= 0.0) {
        return invalid(format!("distance must be nonnegative, got {r}"));
    }
    Ok(profile.value(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn documented_values() {
        let t = CutoffProfile::Theorem31 { radius: 1.0 };
        assert_eq!(cutoff_eval(&t, 0.5).unwrap(), 1.0);
        assert_eq!(cutoff_eval(&t, 1.5).unwrap(), 0.5);
        assert_eq!(cutoff_eval(&t, 2.5).unwrap(), 0.0);
        let o = CutoffProfile::Lemma32Outside {
            inner_radius: 1.0,
            radius: 2.0,
        };
        assert_eq!(cutoff_eval(&o, 1.5).unwrap(), 0.5);
        assert_eq!(cutoff_eval(&o, 0.5).unwrap(), 0.0);
        assert_eq!(cutoff_eval(&o, 3.0).unwrap(), 1.0);
        assert_eq!(cutoff_eval(&o, 5.0).unwrap(), 0.5);
        assert_eq!(cutoff_eval(&o, 6.0).unwrap(), 0.0);
    }

    #[test]
    fn invalid_inputs() {
        assert!(cutoff_eval(&CutoffProfile::Theorem31 { radius: 0.0 }, 1.0).is_err());
        assert!(cutoff_eval(
            &CutoffProfile::Lemma32Outside {
                inner_radius: -1.0,
                radius: 1.0
            },
            1.0
        )
        .is_err());
        assert!(cutoff_eval(&CutoffProfile::Lemma32Simple { radius: 1.0 }, -0.1).is_err());
    }

    #[test]
    fn serde_shape() {
        let p: CutoffProfile =
            serde_json::from_str(r#"{"kind":"lemma32_outside","inner_radius":1.0,"radius":2.0}"#)
                .unwrap();
        assert_eq!(
            p,
            CutoffProfile::Lemma32Outside {
                inner_radius: 1.0,
                radius: 2.0
            }
        );
    }

    fn profiles() -> impl Strategy<Value = CutoffProfile> {
        prop_oneof![
            (0.1f64..5.0).prop_map(|radius| CutoffProfile::Theorem31 { radius }),
            (0.1f64..5.0).prop_map(|radius| CutoffProfile::Lemma32Simple { radius }),
            (0.1f64..5.0, 0.1f64..5.0).prop_map(|(inner_radius, radius)| {
                CutoffProfile::Lemma32Outside {
                    inner_radius,
                    radius,
                }
            }),
        ]
    }

    proptest! {
        #[test]
        fn bounded_lipschitz_compact(p in profiles(), r in 0.0f64..30.0, dr in 1e-6f64..1e-2) {
            let v = cutoff_eval(&p, r).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            let slope_bound = match p {
                CutoffProfile::Lemma32Outside { radius, .. } => (1.0f64).max(1.0 / radius),
                CutoffProfile::Theorem31 { radius } | CutoffProfile::Lemma32Simple { radius } => 1.0 / radius,
            };
            let w = cutoff_eval(&p, r + dr).unwrap();
            prop_assert!((w - v).abs() <= slope_bound * dr * (1.0 + 1e-9) + 1e-15);
            prop_assert_eq!(cutoff_eval(&p, p.support_radius() + r + 1e-9).unwrap(), 0.0);
        }
    }
}
