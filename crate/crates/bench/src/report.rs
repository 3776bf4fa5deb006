use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::Settings;

pub const FORMAT: &str = "report-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub label: String,
    pub metrics: BTreeMap<String, f64>,
}

impl Row {
    pub fn new(label: impl Into<String>) -> Self {
        Row {
            label: label.into(),
            metrics: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: f64) -> &mut Self {
        self.metrics.insert(key.to_string(), value);
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub op: Op,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, op: Op, threshold: f64) -> Self {
        let pass = match op {
            Op::Lt => value < threshold,
            Op::Le => value <= threshold,
            Op::Ge => value >= threshold,
            Op::Eq => value == threshold,
        };
        Check {
            name: name.into(),
            value,
            op,
            threshold,
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format: String,
    pub command: String,
    pub version: String,
    pub config: Settings,
    pub results: Vec<Row>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Report {
    pub fn new(command: &str, config: Settings, results: Vec<Row>, checks: Vec<Check>) -> Self {
        Report {
            format: FORMAT.to_string(),
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            passed: checks.iter().all(|c| c.pass),
            results,
            checks,
        }
    }

    pub fn row(&self, label: &str) -> Option<&Row> {
        self.results.iter().find(|r| r.label == label)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Results in long form: one `label,metric,value` record per metric.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["label", "metric", "value"])?;
        for row in &self.results {
            for (k, v) in &row.metrics {
                out.serialize((&row.label, k, v))?;
            }
        }
        out.flush()?;
        Ok(())
    }
}
