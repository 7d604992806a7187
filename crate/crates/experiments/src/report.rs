use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::output::{to_json_string, Cell};
use crate::{ExperimentError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A named pass/fail check with the measured value and its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, tolerance, passed: value <= tolerance }
    }

    /// Passes when `condition` holds; `value` is recorded for inspection.
    pub fn holds(name: impl Into<String>, condition: bool, value: f64) -> Self {
        Check { name: name.into(), value, tolerance: 0.0, passed: condition }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub experiment: String,
    pub inputs: Map<String, Value>,
    pub columns: Vec<String>,
    pub records: Vec<Vec<Cell>>,
    pub checks: Vec<Check>,
    /// Largest deviation of an identity check, when the experiment has one.
    pub max_deviation: Option<f64>,
    pub wall_time_s: f64,
    /// Experiment-specific payload such as a serialised model.
    pub details: Value,
}

impl ExperimentReport {
    pub fn new(experiment: &str, columns: &[&str]) -> Self {
        ExperimentReport {
            experiment: experiment.to_string(),
            inputs: Map::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            records: Vec::new(),
            checks: Vec::new(),
            max_deviation: None,
            wall_time_s: 0.0,
            details: Value::Null,
        }
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) {
        self.inputs.insert(key.to_string(), serde_json::to_value(value).expect("inputs serialise"));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// All values of one column.
    pub fn values(&self, name: &str) -> Vec<&Cell> {
        let i = self.column(name).unwrap_or_else(|| panic!("no column {name}"));
        self.records.iter().map(|r| &r[i]).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.records {
            w.write_record(r.iter().map(Cell::csv)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }

    pub fn to_json_value(&self) -> Value {
        let records: Vec<Value> = self
            .records
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(k, v)| (k.clone(), serde_json::to_value(v).expect("cells serialise")))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("experiment".into(), Value::from(self.experiment.clone()));
        doc.insert("inputs".into(), Value::Object(self.inputs.clone()));
        doc.insert("passed".into(), Value::from(self.passed()));
        doc.insert("max_deviation".into(), serde_json::to_value(self.max_deviation).expect("option serialises"));
        doc.insert("wall_time_s".into(), Value::from(self.wall_time_s));
        doc.insert("checks".into(), serde_json::to_value(&self.checks).expect("checks serialise"));
        doc.insert("columns".into(), serde_json::to_value(&self.columns).expect("columns serialise"));
        doc.insert("records".into(), Value::Array(records));
        doc.insert("details".into(), self.details.clone());
        Value::Object(doc)
    }

    pub fn to_json(&self) -> String {
        to_json_string(&self.to_json_value())
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn write(&self, path: &Path, format: Format) -> Result<()> {
        std::fs::write(path, self.render(format)).map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))
    }

    /// Human-readable summary of the checks.
    pub fn summary(&self) -> String {
        let mut s = format!("{}: {} records, {:.3} s\n", self.experiment, self.records.len(), self.wall_time_s);
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            s.push_str(&format!("  [{mark}] {} (value {:e}, tolerance {:e})\n", c.name, c.value, c.tolerance));
        }
        s
    }
}
