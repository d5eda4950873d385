use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const CSV_HEADER: &str =
    "suite,s,function,left_label,left_value,left_error,right_label,right_value,right_error,margin,predicted,verdict";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowVerdict {
    Pass,
    Fail,
    Inconclusive,
}

impl RowVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            RowVerdict::Pass => "pass",
            RowVerdict::Fail => "fail",
            RowVerdict::Inconclusive => "inconclusive",
        }
    }
}

/// One comparison. Values are `None` when the evaluation itself failed, in which
/// case the verdict is inconclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub suite: String,
    pub s: f64,
    pub function: String,
    pub left_label: String,
    pub left_value: Option<f64>,
    pub left_error: Option<f64>,
    pub right_label: String,
    pub right_value: Option<f64>,
    pub right_error: Option<f64>,
    pub margin: Option<f64>,
    pub predicted: String,
    pub verdict: RowVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::domain("format", format!("expected csv or json, got '{other}'"))),
        }
    }
}

fn num(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:.16e}"),
        None => String::new(),
    }
}

pub fn to_csv(rows: &[ReportRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(',')).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.suite.clone(),
            format!("{:.16e}", r.s),
            r.function.clone(),
            r.left_label.clone(),
            num(r.left_value),
            num(r.left_error),
            r.right_label.clone(),
            num(r.right_value),
            num(r.right_error),
            num(r.margin),
            r.predicted.clone(),
            r.verdict.label().to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io { path: "<memory>".into(), message: e.to_string() })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io { path: "<memory>".into(), message: e.to_string() }
}

pub fn to_json(rows: &[ReportRow]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(rows).map_err(|e| Error::Io { path: "<memory>".into(), message: e.to_string() })?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<Vec<ReportRow>> {
    serde_json::from_str(text).map_err(|e| Error::Config { line: e.line(), message: e.to_string() })
}

pub fn render(rows: &[ReportRow], format: Format) -> Result<String> {
    match format {
        Format::Csv => to_csv(rows),
        Format::Json => to_json(rows),
    }
}

/// Writes the report to `path`, or to stdout when `path` is `None`.
pub fn emit_report(rows: &[ReportRow], format: Format, path: Option<&Path>) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::domain("emit_report", "no rows to emit"));
    }
    let text = render(rows, format)?;
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io { path: p.display().to_string(), message: e.to_string() }),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| Error::Io { path: "<stdout>".into(), message: e.to_string() })
        }
    }
}

/// Plain one-line-per-row summary for terminals.
pub fn summary(rows: &[ReportRow]) -> String {
    let mut s = String::new();
    for r in rows {
        let _ = writeln!(
            s,
            "{:<12} {:<18} s={:<6} {:<40} {} {}",
            r.verdict.label(),
            r.suite,
            r.s,
            r.function,
            r.left_label,
            r.right_label
        );
    }
    s
}
