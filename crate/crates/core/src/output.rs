//! Result tables and run metadata.
//!
//! The CSV has one fixed schema for every subcommand:
//!
//! ```text
//! sweep_value,scheme,receiver,r_bob_bps,r_eve_bps,r_sec_bps,stderr_bps,trials
//! ```
//!
//! Rows follow sweep order, then scheme order as configured, then receiver
//! (`joint`, `per_subchannel`, `approx`). Floats use Rust's shortest
//! round-trip formatting, which is locale independent. Missing
//! measurements are empty fields.

use std::io::Write;
use std::path::Path;
use std::process::Command;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ResolvedSpec;
use crate::error::{Error, Result};
use crate::simulate::{reported_receivers, ExperimentOutput, ExperimentSpec};

pub const CSV_HEADER: [&str; 8] =
    ["sweep_value", "scheme", "receiver", "r_bob_bps", "r_eve_bps", "r_sec_bps", "stderr_bps", "trials"];

fn float_field(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{v}"),
        _ => String::new(),
    }
}

/// One flattened table line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub sweep_value: Option<f64>,
    pub scheme: String,
    pub receiver: String,
    pub r_bob_bps: Option<f64>,
    pub r_eve_bps: Option<f64>,
    pub r_sec_bps: Option<f64>,
    pub stderr_bps: Option<f64>,
    pub trials: usize,
}

impl TableRow {
    fn fields(&self) -> [String; 8] {
        [
            float_field(self.sweep_value),
            self.scheme.clone(),
            self.receiver.clone(),
            float_field(self.r_bob_bps),
            float_field(self.r_eve_bps),
            float_field(self.r_sec_bps),
            float_field(self.stderr_bps),
            self.trials.to_string(),
        ]
    }
}

/// Expands aggregated results into table lines, one per reported receiver.
pub fn table_rows(spec: &ExperimentSpec, output: &ExperimentOutput) -> Vec<TableRow> {
    let receivers = reported_receivers(spec);
    let mut rows = Vec::with_capacity(output.rows.len() * receivers.len());
    for row in &output.rows {
        for &receiver in &receivers {
            let (eve, sec) = row.rates_bps.receiver(receiver);
            rows.push(TableRow {
                sweep_value: row.sweep_value,
                scheme: row.scheme.name().to_string(),
                receiver: receiver.name().to_string(),
                r_bob_bps: Some(row.rates_bps.r_bob.mean),
                r_eve_bps: eve.map(|e| e.mean),
                r_sec_bps: sec.map(|e| e.mean),
                stderr_bps: sec.map(|e| e.stderr),
                trials: row.trials,
            });
        }
    }
    rows
}

pub fn write_csv<W: Write>(writer: W, rows: &[TableRow]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(CSV_HEADER).map_err(csv_error)?;
    for row in rows {
        csv.write_record(row.fields()).map_err(csv_error)?;
    }
    csv.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::NumericalFailure(format!("csv: {other:?}")),
    }
}

pub fn write_json<W: Write>(writer: W, rows: &[TableRow]) -> Result<()> {
    serde_json::to_writer_pretty(writer, rows).map_err(|e| Error::NumericalFailure(format!("json: {e}")))
}

/// Checks that a CSV document carries exactly the expected header.
pub fn check_csv_header(text: &str) -> bool {
    text.lines().next().is_some_and(|line| line == CSV_HEADER.join(","))
}

/// `git describe --always --dirty`, or `"unknown"` outside a repository.
pub fn git_describe() -> String {
    Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".to_string())
}

/// Run context recorded next to the results.
#[derive(Debug, Clone)]
pub struct RunInfo<'a> {
    pub command: &'a str,
    pub figure: Option<String>,
    pub workers: usize,
    pub git_describe: String,
}

pub fn metadata(resolved: &ResolvedSpec, output: &ExperimentOutput, info: &RunInfo<'_>) -> Value {
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "git_describe": info.git_describe,
        "command": info.command,
        "figure": info.figure,
        "seed": resolved.spec.seed,
        "workers": info.workers,
        "seed_derivation": "ChaCha12 keyed by SHA-256(tag, master_seed, sweep_index, trial_index), little-endian u64s",
        "csv_columns": CSV_HEADER,
        "spec": resolved.spec,
        "parameters": resolved.parameters(),
        "assumed": resolved.assumed,
        "invalid_sweep_values": output.invalid,
    })
}

pub fn write_metadata(path: &Path, doc: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(doc).map_err(|e| Error::NumericalFailure(format!("json: {e}")))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
