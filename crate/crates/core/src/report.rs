//! Structured experiment records: configuration echo, results and gates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// measured < tolerance
    Below,
    /// measured >= tolerance
    AtLeast,
    /// boolean check, measured is 1 or 0
    Holds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: String,
    pub experiment: String,
    pub config: BTreeMap<String, Value>,
    pub results: BTreeMap<String, Value>,
    pub gates: Vec<Gate>,
    pub warnings: Vec<String>,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            experiment: experiment.into(),
            config: BTreeMap::new(),
            results: BTreeMap::new(),
            gates: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn config(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.config.insert(key.to_string(), to_value(value));
        self
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.results.insert(key.to_string(), to_value(value));
        self
    }

    pub fn gate_below(&mut self, name: &str, measured: f64, tolerance: f64) -> bool {
        self.push_gate(name, measured, tolerance, Comparison::Below, measured < tolerance)
    }

    pub fn gate_at_least(&mut self, name: &str, measured: f64, tolerance: f64) -> bool {
        self.push_gate(name, measured, tolerance, Comparison::AtLeast, measured >= tolerance)
    }

    pub fn gate_holds(&mut self, name: &str, holds: bool) -> bool {
        self.push_gate(name, if holds { 1.0 } else { 0.0 }, 1.0, Comparison::Holds, holds)
    }

    fn push_gate(&mut self, name: &str, measured: f64, tolerance: f64, comparison: Comparison, passed: bool) -> bool {
        self.gates.push(Gate { name: name.to_string(), measured, tolerance, comparison, passed });
        passed
    }

    pub fn warn(&mut self, message: impl Into<String>) -> &mut Self {
        self.warnings.push(message.into());
        self
    }

    pub fn all_passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    pub fn failed_gates(&self) -> impl Iterator<Item = &Gate> {
        self.gates.iter().filter(|g| !g.passed)
    }

    /// Pretty JSON with a trailing newline. Key order is fixed, so equal
    /// reports serialize to identical bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values are always serializable");
        s.push('\n');
        s
    }
}

fn to_value(value: impl Serialize) -> Value {
    serde_json::to_value(value).unwrap_or(Value::Null)
}
