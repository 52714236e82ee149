//! Scenario drivers. Each turns a [`RunConfig`] into a metrics table, a list of
//! verdicts and the fields worth dumping; writing them out is left to `io::run`.

mod ensembles;
mod local;
mod solve;
mod stochastic;

use serde::Serialize;

use crate::error::Result;
use crate::field::SampledField;
use crate::io::config::{RunConfig, ScenarioKind};

pub use ensembles::{degiorgi_scenario, harnack_scenario};
pub use local::{holder_scenario, maxprinciple_scenario, scaling_scenario};
pub use solve::{ns2d_scenario, pde_scenario, sqg_scenario};
pub use stochastic::{krylov_scenario, martingale_scenario, particles_scenario, stable_scenario};

/// Numeric table written as `metrics.csv`, one row per snapshot or case.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// One pass/fail check: `pass` records whether `value` met `threshold` in the
/// direction stated by `relation`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub check: String,
    pub value: f64,
    pub relation: &'static str,
    pub threshold: f64,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn at_most(check: &str, value: f64, threshold: f64) -> Self {
        Self {
            check: check.to_string(),
            value,
            relation: "<=",
            threshold,
            pass: value <= threshold,
            detail: String::new(),
        }
    }

    pub fn at_least(check: &str, value: f64, threshold: f64) -> Self {
        Self {
            check: check.to_string(),
            value,
            relation: ">=",
            threshold,
            pass: value >= threshold,
            detail: String::new(),
        }
    }

    pub fn flag(check: &str, pass: bool) -> Self {
        Self {
            check: check.to_string(),
            value: if pass { 1.0 } else { 0.0 },
            relation: "==",
            threshold: 1.0,
            pass,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioOutput {
    pub scenario: ScenarioKind,
    pub table: Table,
    pub verdicts: Vec<Verdict>,
    /// Named field dumps, written as `<name>.ffd`.
    pub dumps: Vec<(String, SampledField)>,
    /// Scenario-specific report, written as `report.json`.
    pub report: serde_json::Value,
}

impl ScenarioOutput {
    pub fn new(scenario: ScenarioKind, table: Table) -> Self {
        Self {
            scenario,
            table,
            verdicts: Vec::new(),
            dumps: Vec::new(),
            report: serde_json::Value::Null,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdict(&self, check: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.check == check)
    }
}

pub fn execute(kind: ScenarioKind, cfg: &RunConfig) -> Result<ScenarioOutput> {
    match kind {
        ScenarioKind::SolvePde => pde_scenario(cfg),
        ScenarioKind::SolveSqg => sqg_scenario(cfg),
        ScenarioKind::SolveNs2d => ns2d_scenario(cfg),
        ScenarioKind::RunParticles => particles_scenario(cfg),
        ScenarioKind::SampleStable => stable_scenario(cfg),
        ScenarioKind::VerifyMaxprinciple => maxprinciple_scenario(cfg),
        ScenarioKind::VerifyHarnack => harnack_scenario(cfg),
        ScenarioKind::VerifyHolder => holder_scenario(cfg),
        ScenarioKind::VerifyScaling => scaling_scenario(cfg),
        ScenarioKind::VerifyDegiorgi => degiorgi_scenario(cfg),
        ScenarioKind::VerifyKrylov => krylov_scenario(cfg),
        ScenarioKind::VerifyMartingale => martingale_scenario(cfg),
    }
}

fn metrics_table(tr: &crate::solver::Trajectory) -> Table {
    let mut t = Table::new(&["t", "linf", "l2", "mass", "max_div"]);
    for m in &tr.metrics {
        t.push(vec![m.t, m.linf, m.l2, m.mass, m.max_div]);
    }
    t
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}
