//! Experiment reports and their JSON/CSV forms.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::config::Algorithm;
use crate::error::{HarnessError, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 7] = [
    "algorithm",
    "eps",
    "run",
    "objective",
    "runtime_ms",
    "stored_points",
    "fair",
];

/// One solver call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub eps: f64,
    pub run: usize,
    /// Absent when the call failed.
    pub objective: Option<f64>,
    pub runtime_ms: f64,
    /// Peak points held (streaming only).
    pub stored_points: Option<usize>,
    pub fair: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunRecord {
    pub fn failed(&self) -> bool {
        self.objective.is_none()
    }
}

/// Mean and sample standard deviation of the successful runs of one
/// (algorithm, eps) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub algorithm: Algorithm,
    pub eps: f64,
    pub runs: usize,
    pub failures: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub dataset: String,
    pub n: usize,
    pub m: usize,
    /// Source label of each group id, in id order.
    #[serde(default)]
    pub group_labels: Vec<String>,
    pub k: usize,
    pub k_fraction: f64,
    pub seed: u64,
    pub runs: usize,
    pub rows: Vec<RunRecord>,
    pub aggregates: Vec<Aggregate>,
}

impl Report {
    pub fn aggregate(&self, algorithm: Algorithm, eps: f64) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.algorithm == algorithm && a.eps == eps)
    }
}

/// Aggregates over `rows`, one per (algorithm, eps) in order of first
/// appearance.
pub fn aggregate(rows: &[RunRecord]) -> Vec<Aggregate> {
    let mut keys: Vec<(Algorithm, f64)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|&(a, e)| a == r.algorithm && e == r.eps) {
            keys.push((r.algorithm, r.eps));
        }
    }
    keys.into_iter()
        .map(|(algorithm, eps)| {
            let cell: Vec<&RunRecord> = rows
                .iter()
                .filter(|r| r.algorithm == algorithm && r.eps == eps)
                .collect();
            let values: Vec<f64> = cell.iter().filter_map(|r| r.objective).collect();
            let (mean, std) = mean_std(&values);
            Aggregate {
                algorithm,
                eps,
                runs: values.len(),
                failures: cell.len() - values.len(),
                mean,
                std,
            }
        })
        .collect()
}

/// Mean and sample (n-1) standard deviation; the deviation of a single
/// value is 0.
pub fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (Some(mean), Some(0.0));
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some(var.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

pub fn emit_report<W: Write>(report: &Report, format: Format, mut w: W) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, report).map_err(|e| HarnessError::Parse(e.to_string()))?;
            writeln!(w).map_err(|e| HarnessError::io("<report>", e))?;
        }
        Format::Csv => write_rows_csv(&report.rows, w)?,
    }
    Ok(())
}

pub fn write_rows_csv<W: Write>(rows: &[RunRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let fail = |e: csv::Error| HarnessError::Parse(e.to_string());
    out.write_record(CSV_HEADER).map_err(fail)?;
    for r in rows {
        out.write_record([
            r.algorithm.name().to_string(),
            r.eps.to_string(),
            r.run.to_string(),
            r.objective.map(|v| v.to_string()).unwrap_or_default(),
            r.runtime_ms.to_string(),
            r.stored_points.map(|v| v.to_string()).unwrap_or_default(),
            r.fair.to_string(),
        ])
        .map_err(fail)?;
    }
    out.flush().map_err(|e| HarnessError::io("<report>", e))
}

pub fn parse_report_json<R: Read>(r: R) -> Result<Report> {
    serde_json::from_reader(r).map_err(|e| HarnessError::Parse(e.to_string()))
}

/// Rows of a CSV report. Failure messages are not part of the CSV form.
pub fn parse_rows_csv<R: Read>(r: R) -> Result<Vec<RunRecord>> {
    let mut reader = csv::Reader::from_reader(r);
    let fail = |e: csv::Error| HarnessError::Parse(e.to_string());
    let header = reader.headers().map_err(fail)?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(HarnessError::Parse(format!("unexpected CSV header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(fail)?;
        let bad = |col: &str| HarnessError::Parse(format!("row {}: bad {col}", i + 1));
        let num = |j: usize, col: &str| rec[j].parse::<f64>().map_err(|_| bad(col));
        let opt = |j: usize| (!rec[j].is_empty()).then(|| &rec[j]);
        rows.push(RunRecord {
            algorithm: rec[0].parse()?,
            eps: num(1, "eps")?,
            run: rec[2].parse().map_err(|_| bad("run"))?,
            objective: opt(3).map(|s| s.parse().map_err(|_| bad("objective"))).transpose()?,
            runtime_ms: num(4, "runtime_ms")?,
            stored_points: opt(5)
                .map(|s| s.parse().map_err(|_| bad("stored_points")))
                .transpose()?,
            fair: rec[6].parse().map_err(|_| bad("fair"))?,
            error: None,
        });
    }
    Ok(rows)
}
