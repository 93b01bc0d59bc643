//! On-disk formats: the per-iteration CSV trace, the sample log and the
//! JSON report.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::driver::{IterationRecord, TerminationReason};
use crate::kkt::KktResidual;
use crate::oracle::Sample;

pub const TRACE_COLUMNS: [&str; 10] = [
    "k",
    "f0",
    "step_norm",
    "nu",
    "lambda_inf",
    "delta1",
    "delta2_max",
    "samples_cumulative",
    "wall_time_ms",
    "events",
];

/// One CSV row. Multiplier fields are empty when the certificate step did
/// not run that iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub f0: f64,
    pub step_norm: f64,
    pub nu: f64,
    pub lambda_inf: Option<f64>,
    pub delta1: Option<f64>,
    pub delta2_max: Option<f64>,
    pub samples_cumulative: usize,
    pub wall_time_ms: f64,
    /// `;`-separated.
    pub events: String,
}

impl From<&IterationRecord> for TraceRow {
    fn from(r: &IterationRecord) -> Self {
        TraceRow {
            k: r.k,
            f0: r.f0,
            step_norm: r.step_norm,
            nu: r.nu,
            lambda_inf: r.lambda_inf,
            delta1: r.delta1,
            delta2_max: r.delta2_max,
            samples_cumulative: r.samples_cumulative,
            wall_time_ms: r.wall_time_ms,
            events: r.events.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(";"),
        }
    }
}

pub fn samples_path(trace: &Path) -> PathBuf {
    trace.with_extension("samples.jsonl")
}

pub fn report_path(trace: &Path) -> PathBuf {
    trace.with_extension("report.json")
}

fn create(path: &Path) -> std::io::Result<File> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    File::create(path)
}

/// Streaming CSV writer; the header goes out even if no row follows.
pub struct TraceWriter {
    inner: csv::Writer<BufWriter<File>>,
}

impl TraceWriter {
    pub fn create(path: &Path) -> std::io::Result<Self> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(BufWriter::new(create(path)?));
        inner.write_record(TRACE_COLUMNS).map_err(std::io::Error::other)?;
        Ok(TraceWriter { inner })
    }

    pub fn write(&mut self, record: &IterationRecord) -> std::io::Result<()> {
        self.inner.serialize(TraceRow::from(record)).map_err(std::io::Error::other)
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>, String> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    if headers.iter().ne(TRACE_COLUMNS.iter().copied()) {
        return Err(format!("{}: unexpected columns {:?}", path.display(), headers));
    }
    reader
        .deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| format!("{} row {}: {e}", path.display(), i + 1)))
        .collect()
}

pub fn write_samples(path: &Path, samples: &[Sample]) -> std::io::Result<()> {
    let mut out = BufWriter::new(create(path)?);
    for s in samples {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_samples(path: &Path) -> Result<Vec<Sample>, String> {
    let file = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    BufReader::new(file)
        .lines()
        .enumerate()
        .filter(|(_, l)| !matches!(l, Ok(l) if l.trim().is_empty()))
        .map(|(i, line)| {
            let line = line.map_err(|e| e.to_string())?;
            serde_json::from_str(&line).map_err(|e| format!("{} line {}: {e}", path.display(), i + 1))
        })
        .collect()
}

/// Machine-readable summary of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub problem: String,
    pub reason: TerminationReason,
    pub exit_code: i32,
    pub k_tilde: usize,
    pub x_tilde: Vec<f64>,
    pub lambda_tilde: Vec<f64>,
    /// Objective of the original problem at `x_tilde`.
    pub objective: f64,
    pub eta: f64,
    pub xi: f64,
    pub lambda_bound: f64,
    /// Largest approximate-KKT residual against ground truth.
    pub eta_kkt_residual: f64,
    pub is_eta_kkt: bool,
    pub kkt: KktResidual,
    pub samples: usize,
    /// Samples whose returned values showed a violated constraint.
    pub infeasible_samples_observed: usize,
    pub lipschitz: Vec<f64>,
    pub smoothness: Vec<f64>,
    pub message: Option<String>,
}

pub fn write_report(path: &Path, report: &RunReport) -> std::io::Result<()> {
    let mut out = BufWriter::new(create(path)?);
    serde_json::to_writer_pretty(&mut out, report)?;
    out.write_all(b"\n")?;
    out.flush()
}

pub fn read_report(path: &Path) -> Result<RunReport, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}
