//! Observed convergence order from residuals on successively refined grids.

use serde::Serialize;

/// Residuals at or below this level are treated as rounding noise.
pub const ROUNDOFF_FLOOR: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ObservedOrder {
    /// Both residuals sit at the rounding floor: the discrete identity is
    /// reproduced exactly and no order can be measured.
    Exact,
    Order(f64),
}

impl ObservedOrder {
    pub fn meets(&self, min_order: f64) -> bool {
        match self {
            ObservedOrder::Exact => true,
            ObservedOrder::Order(p) => *p >= min_order,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            ObservedOrder::Exact => None,
            ObservedOrder::Order(p) => Some(*p),
        }
    }
}

/// `log(e_coarse / e_fine) / log(h_coarse / h_fine)`.
pub fn observed_order(h_coarse: f64, e_coarse: f64, h_fine: f64, e_fine: f64) -> ObservedOrder {
    observed_order_with_floor(h_coarse, e_coarse, h_fine, e_fine, ROUNDOFF_FLOOR)
}

pub fn observed_order_with_floor(
    h_coarse: f64,
    e_coarse: f64,
    h_fine: f64,
    e_fine: f64,
    floor: f64,
) -> ObservedOrder {
    if e_coarse.abs() <= floor && e_fine.abs() <= floor {
        return ObservedOrder::Exact;
    }
    if e_fine.abs() <= floor {
        // fine residual vanished while the coarse one did not; clamp at the floor
        return ObservedOrder::Order((e_coarse.abs() / floor).ln() / (h_coarse / h_fine).ln());
    }
    ObservedOrder::Order((e_coarse.abs() / e_fine.abs()).ln() / (h_coarse / h_fine).ln())
}

/// Orders between consecutive levels of a refinement sequence.
pub fn orders(levels: &[(f64, f64)]) -> Vec<ObservedOrder> {
    levels
        .windows(2)
        .map(|w| observed_order(w[0].0, w[0].1, w[1].0, w[1].1))
        .collect()
}
