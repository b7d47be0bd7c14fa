//! Scenario runner: parses a JSON scenario, runs one command, and writes
//! `report.json` plus CSV tables and two-column plot data into an output
//! directory.

mod commands;
pub mod params;
pub mod report;
pub mod sampling;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Deserialize;
use serde_json::Value;

use crate::error::Error;
pub use params::{Command, CommandKind};
pub use report::{CheckMode, CheckRecord, CheckStatus, RunReport, RunStatus};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "HYPERSTAB_THREADS";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub command: CommandKind,
    /// Seeds every random choice; equal seeds give byte-identical tables.
    pub seed: u64,
    pub params: Value,
    /// Per-check overrides of the default asserted / report-only mode.
    #[serde(default)]
    pub check_modes: BTreeMap<String, CheckMode>,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Plan {
    pub scenario: Scenario,
    pub command: Command,
    pub checks: Vec<(&'static str, CheckMode)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    Invalid(String),
    Numerical(String),
    Io(String),
}

impl RunError {
    pub fn status(&self) -> RunStatus {
        match self {
            RunError::Invalid(_) | RunError::Io(_) => RunStatus::InvalidConfig,
            RunError::Numerical(_) => RunStatus::NumericalFailure,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            RunError::Invalid(m) | RunError::Numerical(m) | RunError::Io(m) => m,
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::NumericalFailure(_) | Error::DivisionByZero(_) => {
                RunError::Numerical(e.to_string())
            }
            _ => RunError::Invalid(e.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for RunError {
    fn from(e: serde_json::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        serde_json::from_str(text).map_err(|e| RunError::Invalid(format!("scenario: {e}")))
    }

    pub fn plan(self) -> Result<Plan, RunError> {
        if self.name.trim().is_empty() {
            return Err(RunError::Invalid("scenario name is empty".into()));
        }
        let command = Command::parse(self.command, &self.params)?;
        let mut checks = command.declared_checks();
        for (name, mode) in &self.check_modes {
            match checks.iter_mut().find(|(n, _)| n == name) {
                Some(slot) => slot.1 = *mode,
                None => {
                    let known: Vec<&str> = checks.iter().map(|(n, _)| *n).collect();
                    return Err(RunError::Invalid(format!(
                        "check_modes names unknown check {name}; this scenario runs {known:?}"
                    )));
                }
            }
        }
        Ok(Plan {
            scenario: self,
            command,
            checks,
        })
    }
}

pub fn load(path: &Path) -> Result<Plan, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Invalid(format!("{}: {e}", path.display())))?;
    Scenario::from_json(&text)?.plan()
}

/// Runs the scenario at `config`, writing artifacts under `out`. Never
/// panics on bad input: failures are folded into the returned report, which
/// is also written to `out/report.json` whenever the directory is usable.
pub fn run(config: &Path, out: &Path) -> RunReport {
    let start = Instant::now();
    match load(config) {
        Ok(plan) => execute(&plan, out),
        Err(e) => {
            let report = RunReport {
                scenario: None,
                command: None,
                seed: None,
                status: e.status(),
                exit_code: e.status().exit_code(),
                checks: Vec::new(),
                artifacts: Vec::new(),
                error: Some(e.message().to_string()),
                wall_time_s: start.elapsed().as_secs_f64(),
            };
            finish(report, out)
        }
    }
}

pub fn execute(plan: &Plan, out: &Path) -> RunReport {
    let start = Instant::now();
    let mut art = commands::Artifacts {
        dir: out.to_path_buf(),
        files: Vec::new(),
    };
    let result = std::fs::create_dir_all(out)
        .map_err(RunError::from)
        .and_then(|_| commands::execute(&plan.command, plan.scenario.seed, &mut art));

    let (checks, status, error) = match result {
        Ok(outcomes) => {
            let mut by_name: BTreeMap<&str, report::Outcome> =
                outcomes.into_iter().map(|o| (o.name, o)).collect();
            let checks: Vec<CheckRecord> = plan
                .checks
                .iter()
                .map(|&(name, mode)| match by_name.remove(name) {
                    Some(o) => CheckRecord::resolve(mode, o),
                    None => {
                        CheckRecord::not_evaluated(name, mode, "command produced no measurement")
                    }
                })
                .collect();
            debug_assert!(by_name.is_empty(), "undeclared checks {:?}", by_name.keys());
            let violated = checks.iter().any(|c| c.status == CheckStatus::Fail);
            (
                checks,
                if violated {
                    RunStatus::Violated
                } else {
                    RunStatus::Passed
                },
                None,
            )
        }
        Err(e) => {
            let checks = plan
                .checks
                .iter()
                .map(|&(name, mode)| CheckRecord::not_evaluated(name, mode, "run aborted"))
                .collect();
            (checks, e.status(), Some(e.message().to_string()))
        }
    };
    let report = RunReport {
        scenario: Some(plan.scenario.name.clone()),
        command: Some(plan.scenario.command.name().to_string()),
        seed: Some(plan.scenario.seed),
        status,
        exit_code: status.exit_code(),
        checks,
        artifacts: art.files,
        error,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    finish(report, out)
}

fn finish(mut report: RunReport, out: &Path) -> RunReport {
    let written = std::fs::create_dir_all(out)
        .map_err(RunError::from)
        .and_then(|_| Ok(serde_json::to_string_pretty(&report)?))
        .and_then(|text| Ok(std::fs::write(out.join("report.json"), text + "\n")?));
    if let Err(e) = written {
        report.status = RunStatus::InvalidConfig;
        report.exit_code = report.status.exit_code();
        report.error = Some(format!("cannot write report: {}", e.message()));
    }
    report
}

/// Parses the thread cap from the environment value, if any.
pub fn thread_cap(value: Option<&str>) -> Result<Option<usize>, RunError> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(RunError::Invalid(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn audit_scenario() -> Value {
        json!({
            "name": "audit-small",
            "command": "audit",
            "seed": 7,
            "params": {"spectra": [[2.0, 2.0, -1.0], [1.0, 1.0, 1.0]]}
        })
    }

    #[test]
    fn audit_records_strong_failure_as_report_only() {
        let dir = tempfile::tempdir().unwrap();
        let plan = Scenario::from_json(&audit_scenario().to_string())
            .unwrap()
            .plan()
            .unwrap();
        let report = execute(&plan, dir.path());
        assert_eq!(report.exit_code, 0, "{report:?}");
        let strong = report.check("estima_strong").unwrap();
        assert_eq!(strong.status, CheckStatus::ReportOnly);
        assert_eq!(strong.holds, Some(false));
        assert_eq!(strong.measured["explicit"][0]["strong_holds"], json!(false));
        assert_eq!(strong.measured["explicit"][0]["max_eig_p1"], json!(4.0));
        assert!(dir.path().join("report.json").exists());
        assert!(dir.path().join("audit.csv").exists());
    }

    #[test]
    fn overriding_to_asserted_turns_failure_into_exit_one() {
        let mut s = audit_scenario();
        s["check_modes"] = json!({"estima_strong": "asserted"});
        let dir = tempfile::tempdir().unwrap();
        let plan = Scenario::from_json(&s.to_string()).unwrap().plan().unwrap();
        let report = execute(&plan, dir.path());
        assert_eq!(report.exit_code, 1);
        assert_eq!(report.failed().count(), 1);
    }

    #[test]
    fn unknown_check_override_is_invalid() {
        let mut s = audit_scenario();
        s["check_modes"] = json!({"nonexistent": "asserted"});
        let e = Scenario::from_json(&s.to_string())
            .unwrap()
            .plan()
            .unwrap_err();
        assert_eq!(e.status(), RunStatus::InvalidConfig);
    }

    #[test]
    fn missing_seed_is_invalid() {
        let mut s = audit_scenario();
        s.as_object_mut().unwrap().remove("seed");
        assert!(Scenario::from_json(&s.to_string()).is_err());
    }

    #[test]
    fn numerical_errors_map_to_exit_three() {
        let e: RunError = Error::NumericalFailure("x".into()).into();
        assert_eq!(e.status().exit_code(), 3);
        let e: RunError = Error::PreconditionViolation("x".into()).into();
        assert_eq!(e.status().exit_code(), 2);
    }

    #[test]
    fn thread_cap_parsing() {
        assert_eq!(thread_cap(None).unwrap(), None);
        assert_eq!(thread_cap(Some("3")).unwrap(), Some(3));
        assert!(thread_cap(Some("0")).is_err());
        assert!(thread_cap(Some("many")).is_err());
    }

    #[test]
    fn every_declared_check_reported_once() {
        let s = json!({
            "name": "growth-flat",
            "command": "growth",
            "seed": 1,
            "params": {
                "patch": {"kind": "flat", "n": 2, "domain": {"box": {"lo": [-1.0, -1.0], "hi": [1.0, 1.0]}}},
                "grid_h": 0.25,
                "radii": [0.25, 0.5],
                "bound": {"thetas": [0.5], "radii": [0.5, 1.0]}
            }
        });
        let dir = tempfile::tempdir().unwrap();
        let plan = Scenario::from_json(&s.to_string()).unwrap().plan().unwrap();
        let report = execute(&plan, dir.path());
        assert_eq!(report.exit_code, 0, "{report:?}");
        let names: Vec<&str> = report.checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, vec!["monotone", "growth_bound"]);
    }
}
