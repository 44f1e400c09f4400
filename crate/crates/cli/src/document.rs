//! Result documents: a run manifest plus a flat table of records, rendered
//! as JSON or as CSV with the manifest on a leading comment line.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

pub const SCHEMA: &str = "prepost-result/v1";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Every parameter of the run, defaults included.
    pub params: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub duration_ms: f64,
}

/// Ordered columns and rows of scalar values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    /// Appends a row; panics if its width differs from the header.
    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn records(&self) -> Vec<Map<String, Value>> {
        self.rows.iter().map(|r| self.columns.iter().cloned().zip(r.iter().cloned()).collect()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Document {
    pub schema: &'static str,
    pub manifest: RunManifest,
    pub passed: bool,
    pub warnings: Vec<String>,
    pub columns: Vec<String>,
    pub records: Vec<Map<String, Value>>,
}

impl Document {
    pub fn new(manifest: RunManifest, passed: bool, warnings: Vec<String>, table: &Table) -> Self {
        Document {
            schema: SCHEMA,
            manifest,
            passed,
            warnings,
            columns: table.columns.clone(),
            records: table.records(),
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::Runtime(e.to_string()))
    }

    /// CSV body with a header row, preceded by `# ` and the document
    /// without its records as one JSON line.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let header = serde_json::json!({
            "schema": self.schema,
            "manifest": self.manifest,
            "passed": self.passed,
            "warnings": self.warnings,
        });
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(csv_err)?;
        for rec in &self.records {
            w.write_record(self.columns.iter().map(|c| csv_field(&rec[c]))).map_err(csv_err)?;
        }
        let body = String::from_utf8(w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        Ok(format!("# {header}\n{body}"))
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Scalars print exactly as in JSON; strings unquoted; null as empty.
pub fn csv_field(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Float as a JSON number, or null when not finite.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

/// Semicolon-separated list for cells holding a vector.
pub fn joined<I: IntoIterator<Item = String>>(items: I) -> Value {
    Value::String(items.into_iter().collect::<Vec<_>>().join(";"))
}
