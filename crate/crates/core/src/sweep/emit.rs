//! Result tables and their CSV / JSON encodings.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Map, Value};

use super::spec::Format;
use crate::error::{Error, Result};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Column-labelled numeric rows plus free-form metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub schema: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Ordered `(key, value)` pairs; emitted before the data.
    pub metadata: Vec<(String, String)>,
}

impl ResultTable {
    pub fn new(schema: &[&str], metadata: Vec<(String, String)>) -> Self {
        Self {
            schema: schema.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            metadata,
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.schema.len(), "row width must match schema");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.schema.iter().position(|s| s == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// `%.12g`: 12 significant digits, trailing zeros dropped, exponent form
/// outside `1e-5 <= |v| < 1e12`.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= SIGNIFICANT_DIGITS as i32 {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Value after the 12-significant-digit rounding used by both encodings.
pub fn rounded(v: f64) -> f64 {
    format_value(v).parse().unwrap_or(v)
}

pub fn to_csv(table: &ResultTable) -> String {
    let mut out = String::new();
    for (key, value) in &table.metadata {
        let _ = writeln!(out, "# {key}: {value}");
    }
    let _ = writeln!(out, "{}", table.schema.join(","));
    for row in &table.rows {
        let fields: Vec<String> = row.iter().map(|&v| format_value(v)).collect();
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}

pub fn to_json(table: &ResultTable) -> String {
    let metadata: Map<String, Value> = table
        .metadata
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            Value::Array(
                row.iter()
                    .map(|&v| {
                        serde_json::Number::from_f64(rounded(v))
                            .map(Value::Number)
                            .unwrap_or_else(|| Value::String(format_value(v)))
                    })
                    .collect(),
            )
        })
        .collect();
    let doc = json!({
        "metadata": metadata,
        "schema": table.schema,
        "rows": rows,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
    text.push('\n');
    text
}

pub fn render(table: &ResultTable, format: Format) -> String {
    match format {
        Format::Csv => to_csv(table),
        Format::Json => to_json(table),
    }
}

/// Writes the encoded table to `path`.
pub fn emit(table: &ResultTable, format: Format, path: &Path) -> Result<()> {
    std::fs::write(path, render(table, format)).map_err(|source| Error::Emit {
        path: path.to_path_buf(),
        source,
    })
}
