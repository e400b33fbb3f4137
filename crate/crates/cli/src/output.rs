//! Output envelope and the json / csv / table emitters.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

/// Significant digits kept for floating-point fields.
pub const FLOAT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub version: String,
    pub timestamp: String,
}

impl Meta {
    pub fn now() -> Self {
        Meta {
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEnvelope {
    pub command: String,
    pub params: Map<String, Value>,
    pub rows: Vec<Value>,
    pub meta: Meta,
}

impl OutputEnvelope {
    pub fn new(command: &str, params: Map<String, Value>) -> Self {
        OutputEnvelope {
            command: command.to_string(),
            params,
            rows: Vec::new(),
            meta: Meta::now(),
        }
    }

    pub fn push<R: Serialize>(&mut self, row: &R) -> Result<(), CliError> {
        let v = serde_json::to_value(row).map_err(|e| CliError::Serialization(e.to_string()))?;
        self.rows.push(v);
        Ok(())
    }
}

/// Rounds to [`FLOAT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", FLOAT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

pub fn round_opt(x: Option<f64>) -> Option<f64> {
    x.map(round_sig)
}

/// Text of a scalar cell, shared by the csv and table emitters.
pub fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn columns(rows: &[Value]) -> Vec<String> {
    let mut cols: Vec<String> = Vec::new();
    for r in rows {
        if let Value::Object(m) = r {
            for k in m.keys() {
                if !cols.contains(k) {
                    cols.push(k.clone());
                }
            }
        }
    }
    cols
}

fn lookup<'a>(row: &'a Value, col: &str) -> &'a Value {
    row.get(col).unwrap_or(&Value::Null)
}

pub fn write_json<W: Write>(env: &OutputEnvelope, out: &mut W) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, env)
        .map_err(|e| CliError::Serialization(e.to_string()))?;
    writeln!(out).map_err(|e| CliError::Serialization(e.to_string()))
}

pub fn write_csv<W: Write>(env: &OutputEnvelope, out: &mut W) -> Result<(), CliError> {
    let cols = columns(&env.rows);
    let mut w = csv::Writer::from_writer(out);
    let ser = |e: csv::Error| CliError::Serialization(e.to_string());
    w.write_record(&cols).map_err(ser)?;
    for r in &env.rows {
        w.write_record(cols.iter().map(|c| cell(lookup(r, c))))
            .map_err(ser)?;
    }
    w.flush()
        .map_err(|e| CliError::Serialization(e.to_string()))
}

pub fn write_table<W: Write>(env: &OutputEnvelope, out: &mut W) -> Result<(), CliError> {
    let cols = columns(&env.rows);
    let cells: Vec<Vec<String>> = env
        .rows
        .iter()
        .map(|r| cols.iter().map(|c| cell(lookup(r, c))).collect())
        .collect();
    let widths: Vec<usize> = cols
        .iter()
        .enumerate()
        .map(|(i, c)| {
            cells
                .iter()
                .map(|r| r[i].len())
                .chain([c.len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let io = |e: std::io::Error| CliError::Serialization(e.to_string());
    let line = |vals: &[String]| {
        vals.iter()
            .zip(&widths)
            .map(|(v, w)| format!("{v:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    writeln!(out, "{}", line(&cols)).map_err(io)?;
    for r in &cells {
        writeln!(out, "{}", line(r)).map_err(io)?;
    }
    Ok(())
}

pub fn emit<W: Write>(env: &OutputEnvelope, format: Format, out: &mut W) -> Result<(), CliError> {
    match format {
        Format::Json => write_json(env, out),
        Format::Csv => write_csv(env, out),
        Format::Table => write_table(env, out),
    }
}

/// Parses csv output back into `(header, records)`.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let ser = |e: csv::Error| CliError::Serialization(e.to_string());
    let header = r.headers().map_err(ser)?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(ser)?;
    Ok((header, rows))
}
