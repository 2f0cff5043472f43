//! Result rows and their CSV / JSON-lines encodings.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One timed repetition. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    /// `random_circuit` or `rotation`.
    pub benchmark: String,
    pub num_qubits: usize,
    pub depth: usize,
    pub seed: u64,
    pub workers: usize,
    pub ranks_log2: usize,
    pub strategy: String,
    pub kind: String,
    pub precision: String,
    /// Rotated qubit for the rotation sweep.
    pub target: Option<usize>,
    pub repetition: usize,
    pub gate_count: usize,
    /// Gate loop only, between the start and end barriers.
    pub wall_time_seconds: f64,
    pub time_per_gate_seconds: f64,
    /// Amplitudes plus exchange buffers summed over all ranks.
    pub peak_modeled_bytes: u64,
    /// Peak resident set of the process, if the OS reports it.
    pub measured_process_bytes: Option<u64>,
    /// Summed over ranks.
    pub comm_bytes: u64,
    pub comm_messages: u64,
    /// Mean communicated-target time over mean local-target time.
    pub slowdown_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    JsonLines,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" | "jsonl" => Ok(OutputFormat::JsonLines),
            other => Err(Error::domain(format!("unknown output format `{other}` (csv, json)"))),
        }
    }
}

/// Writes rows with a header line. `None` fields become empty cells.
pub fn write_csv<W: Write, R: Serialize>(out: W, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one JSON object per line. `None` fields become `null`.
pub fn write_json_lines<W: Write, R: Serialize>(mut out: W, rows: &[R]) -> Result<()> {
    for r in rows {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_rows<W: Write, R: Serialize>(out: W, rows: &[R], format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(out, rows),
        OutputFormat::JsonLines => write_json_lines(out, rows),
    }
}
