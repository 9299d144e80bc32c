use std::fmt::Write as _;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub violation: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl CheckResult {
    pub fn new(name: &str, violation: f64, threshold: f64) -> Self {
        Self { name: name.to_string(), violation, threshold, passed: violation <= threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub space: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub warnings: Vec<String>,
    pub passed: bool,
}

impl RunReport {
    pub fn new(space: String, seed: u64, checks: Vec<CheckResult>, warnings: Vec<String>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self { space, seed, checks, warnings, passed }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let mut out = String::new();
        writeln!(out, "space: {}", self.space).unwrap();
        writeln!(out, "{:<width$}  {:>10}  {:>10}  status", "check", "violation", "threshold").unwrap();
        for c in &self.checks {
            let status = if c.passed { "pass" } else { "FAIL" };
            writeln!(out, "{:<width$}  {:>10.3e}  {:>10.3e}  {status}", c.name, c.violation, c.threshold).unwrap();
        }
        for w in &self.warnings {
            writeln!(out, "warning: {w}").unwrap();
        }
        writeln!(out, "overall: {}", if self.passed { "PASS" } else { "FAIL" }).unwrap();
        out
    }
}
