//! Experiment drivers behind the command-line tool: each bench builds
//! scenarios, runs them through the simulator and returns CSV rows.

use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::simnet::SimError;

mod bench;
mod selftest;

pub use bench::{
    auth_bench, handover_bench, latency_bench, parse_rate_bps, parse_sweep, throughput_bench, AuthBenchParams, AuthRow,
    HandoverBenchParams, HandoverRow, LatencyBenchParams, LatencyRow, ThroughputBenchParams, ThroughputReport,
    ThroughputRow, ThroughputSummary,
};
pub use selftest::{selftest, Fault, PropertyResult};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    pub fn is_config(&self) -> bool {
        matches!(self, HarnessError::Config(_) | HarnessError::Sim(SimError::Config(_)))
    }
}

/// A CSV record type with a fixed column list.
pub trait CsvRow: Serialize {
    const HEADER: &'static [&'static str];
}

/// Serializes rows with a header line, even when there are no rows.
pub fn to_csv_string<T: CsvRow>(rows: &[T]) -> Result<String, HarnessError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(T::HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

pub fn write_csv<T: CsvRow>(path: &Path, rows: &[T]) -> Result<(), HarnessError> {
    std::fs::write(path, to_csv_string(rows)?)?;
    Ok(())
}
