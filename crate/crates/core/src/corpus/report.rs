//! Suite reports.

use super::scenario::{Task, Tolerances};
use crate::forms::TensorDump;
use crate::immersion::DegeneracyProfile;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Passed, but some rank decision sat near its threshold or the jet budget ran out.
    Flagged,
}

/// One reported number. Without a tolerance it is informational.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl Residual {
    pub fn passes(&self) -> bool {
        // NaN fails
        self.tolerance.is_none_or(|t| self.value <= t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub task: Task,
    pub status: Status,
    pub residuals: Vec<Residual>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degeneracy: Option<DegeneracyProfile>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tensors: BTreeMap<String, TensorDump>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl TaskReport {
    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals
            .iter()
            .find(|r| r.name == name)
            .map(|r| r.value)
    }

    pub fn failing(&self) -> Vec<&Residual> {
        self.residuals.iter().filter(|r| !r.passes()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: String,
    pub jet_order: usize,
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub task_tolerances: BTreeMap<Task, f64>,
    pub passed: bool,
    pub tasks: Vec<TaskReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl Report {
    pub fn task(&self, t: Task) -> Option<&TaskReport> {
        self.tasks.iter().find(|r| r.task == t)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One line per task.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for t in &self.tasks {
            let worst = t
                .residuals
                .iter()
                .filter(|r| r.tolerance.is_some())
                .map(|r| r.value)
                .fold(0.0, |m: f64, v| {
                    if v.is_nan() || m.is_nan() {
                        f64::NAN
                    } else {
                        m.max(v)
                    }
                });
            let status = match t.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Flagged => "flag",
            };
            out.push_str(&format!(
                "{:<5} {:<12} max {:.2e}",
                status,
                t.task.name(),
                worst
            ));
            if let Some(n) = &t.note {
                out.push_str(&format!("  ({n})"));
            }
            for r in t.failing() {
                out.push_str(&format!(
                    "\n        {} = {:e} > {:e}",
                    r.name,
                    r.value,
                    r.tolerance.unwrap_or(0.0)
                ));
            }
            out.push('\n');
        }
        out
    }
}
