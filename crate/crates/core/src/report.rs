//! Structured experiment reports.
//!
//! A report is a JSON object tagged with [`REPORT_SCHEMA`]:
//!
//! ```text
//! {
//!   "schema": "gp-report/1",
//!   "command": [argv...],
//!   "inputs": { name: sha256 hex digest },
//!   "seed": u64 | null,
//!   "config": { tolerance: value },
//!   "sections": [
//!     { "name", "pass",
//!       "checks": [ { "name", "value", "bound", "slack", "pass" } ],
//!       "series": [ { "label", "radii", "values" } ],
//!       "facts": { key: any } }
//!   ],
//!   "summary": { "checks", "passed", "failed", "pass" },
//!   "wall_time_seconds": f64
//! }
//! ```
//!
//! Every numeric assertion is a check carrying `value`, `bound` and `slack`
//! (`slack ≥ 0` iff the check passes). Non-finite numbers serialise as
//! `null`. Apart from `wall_time_seconds`, a report depends only on its
//! inputs and seed.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::config::Config;
use crate::exhaustion::ExhaustionSeries;

pub const REPORT_SCHEMA: &str = "gp-report/1";

pub fn report_schema_version() -> &'static str {
    REPORT_SCHEMA
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Section {
    pub name: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub series: Vec<ExhaustionSeries>,
    pub facts: BTreeMap<String, Value>,
}

impl Section {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), pass: true, checks: Vec::new(), series: Vec::new(), facts: BTreeMap::new() }
    }

    fn push(&mut self, name: impl Into<String>, value: f64, bound: f64, slack: f64) -> bool {
        let pass = slack >= 0.0;
        self.pass &= pass;
        self.checks.push(Check { name: name.into(), value, bound, slack, pass });
        pass
    }

    /// Asserts `value ≤ bound`.
    pub fn at_most(&mut self, name: impl Into<String>, value: f64, bound: f64) -> bool {
        self.push(name, value, bound, bound - value)
    }

    /// Asserts `value ≥ bound`.
    pub fn at_least(&mut self, name: impl Into<String>, value: f64, bound: f64) -> bool {
        self.push(name, value, bound, value - bound)
    }

    /// Asserts `|value - target| ≤ tol`; `bound` is `tol`, `value` the deviation.
    pub fn close_to(&mut self, name: impl Into<String>, value: f64, target: f64, tol: f64) -> bool {
        let dev = (value - target).abs();
        self.push(name, dev, tol, if dev.is_nan() { f64::NEG_INFINITY } else { tol - dev })
    }

    /// Asserts a boolean property: value 1 or 0 against bound 1.
    pub fn holds(&mut self, name: impl Into<String>, ok: bool) -> bool {
        let value = if ok { 1.0 } else { 0.0 };
        self.push(name, value, 1.0, value - 1.0)
    }

    pub fn fact(&mut self, key: impl Into<String>, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.facts.insert(key.into(), v);
    }

    pub fn add_series(&mut self, series: ExhaustionSeries) {
        self.series.push(series);
    }

    /// Records a failure that prevented the section from completing.
    pub fn error(&mut self, context: &str, err: &crate::error::Error) {
        self.holds(format!("{context} completed"), false);
        self.fact(format!("{context} error"), err.to_string());
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub command: Vec<String>,
    pub inputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub config: Config,
    pub sections: Vec<Section>,
    pub summary: Summary,
    pub wall_time_seconds: f64,
}

impl ExperimentReport {
    pub fn new(command: Vec<String>, config: Config) -> Self {
        Self {
            schema: REPORT_SCHEMA.to_string(),
            command,
            inputs: BTreeMap::new(),
            seed: None,
            config,
            sections: Vec::new(),
            summary: Summary { checks: 0, passed: 0, failed: 0, pass: true },
            wall_time_seconds: 0.0,
        }
    }

    pub fn add_input(&mut self, name: impl Into<String>, digest: impl Into<String>) {
        self.inputs.insert(name.into(), digest.into());
    }

    pub fn add_section(&mut self, section: Section) {
        self.sections.push(section);
        self.summarize();
    }

    fn summarize(&mut self) {
        let checks = self.sections.iter().map(|s| s.checks.len()).sum();
        let passed = self.sections.iter().flat_map(|s| &s.checks).filter(|c| c.pass).count();
        self.summary = Summary { checks, passed, failed: checks - passed, pass: self.sections.iter().all(|s| s.pass) };
    }

    pub fn pass(&self) -> bool {
        self.summary.pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// `label,radius,value` rows for every series in every section.
    pub fn series_csv(&self) -> String {
        let mut out = String::from("section,label,radius,value\n");
        for s in &self.sections {
            for series in &s.series {
                for (r, v) in series.radii.iter().zip(&series.values) {
                    let _ = writeln!(out, "{},{},{},{:?}", csv_field(&s.name), csv_field(&series.label), r, v);
                }
            }
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_tag_is_embedded() {
        assert_eq!(report_schema_version(), "gp-report/1");
        let r = ExperimentReport::new(vec!["gp".into()], Config::default());
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema"], "gp-report/1");
    }

    #[test]
    fn checks_carry_value_bound_slack() {
        let mut s = Section::new("t");
        assert!(s.at_most("a", 1.0, 2.0));
        assert!(!s.at_least("b", 1.0, 2.0));
        assert!(s.close_to("c", 1.0 + 1e-13, 1.0, 1e-12));
        assert!(!s.close_to("d", f64::NAN, 1.0, 1e-12));
        assert!(!s.pass);
        assert_eq!(s.checks[0].slack, 1.0);
        assert_eq!(s.checks[1].slack, -1.0);
        let mut r = ExperimentReport::new(vec![], Config::default());
        r.add_section(s);
        assert_eq!((r.summary.checks, r.summary.failed), (4, 2));
        assert!(!r.pass());
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert!(v["sections"][0]["checks"][3]["value"].is_null());
    }

    #[test]
    fn csv_lists_series() {
        let mut s = Section::new("green");
        let mut series = ExhaustionSeries::new("g(0,0)");
        series.push(2, 2.0);
        series.push(4, 4.0);
        s.add_series(series);
        let mut r = ExperimentReport::new(vec![], Config::default());
        r.add_section(s);
        assert_eq!(r.series_csv(), "section,label,radius,value\ngreen,\"g(0,0)\",2,2.0\ngreen,\"g(0,0)\",4,4.0\n");
    }
}
