//! Run reports and exit codes.

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    Asserted,
    ReportOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    ReportOnly,
    Skipped,
}

/// What a command measured for one declared check.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub name: &'static str,
    /// `None` when the check could not be decided (hypotheses unmet).
    pub holds: Option<bool>,
    pub measured: Value,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub mode: CheckMode,
    pub status: CheckStatus,
    pub holds: Option<bool>,
    pub measured: Value,
    pub detail: String,
}

impl CheckRecord {
    pub fn resolve(mode: CheckMode, outcome: Outcome) -> Self {
        let status = match (mode, outcome.holds) {
            (CheckMode::ReportOnly, _) => CheckStatus::ReportOnly,
            (CheckMode::Asserted, Some(true)) => CheckStatus::Pass,
            (CheckMode::Asserted, Some(false)) => CheckStatus::Fail,
            (CheckMode::Asserted, None) => CheckStatus::Skipped,
        };
        Self {
            name: outcome.name.to_string(),
            mode,
            status,
            holds: outcome.holds,
            measured: outcome.measured,
            detail: outcome.detail,
        }
    }

    pub fn not_evaluated(name: &str, mode: CheckMode, why: &str) -> Self {
        Self {
            name: name.to_string(),
            mode,
            status: CheckStatus::Skipped,
            holds: None,
            measured: Value::Null,
            detail: why.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Passed,
    Violated,
    InvalidConfig,
    NumericalFailure,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Passed => 0,
            RunStatus::Violated => 1,
            RunStatus::InvalidConfig => 2,
            RunStatus::NumericalFailure => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: Option<String>,
    pub command: Option<String>,
    pub seed: Option<u64>,
    pub status: RunStatus,
    pub exit_code: i32,
    pub checks: Vec<CheckRecord>,
    /// File names written to the output directory, in creation order.
    pub artifacts: Vec<String>,
    pub error: Option<String>,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }
}
