//! Experiment harness for sketched kernel ridge regression.
//!
//! Configuration, seeding, data loading, the experiment runners and the CSV
//! formats live here; the numerical work is in `sketchkrr_core`.

pub mod config;
pub mod data;
pub mod error;
pub mod experiments;
pub mod records;
pub mod seed;

use std::io::Write;

pub use config::{ExperimentConfig, ExperimentKind, Method};
pub use error::{HarnessError, Result};
pub use experiments::RunOptions;
pub use records::ExperimentRecord;

use experiments::{BenchRow, DiagnosticRow, BENCH_FIELDS, DIAGNOSTIC_FIELDS};

/// Rows produced by one experiment run.
#[derive(Debug, Clone)]
pub enum RunOutput {
    Records(Vec<ExperimentRecord>),
    Diagnostics(Vec<DiagnosticRow>),
    Bench(Vec<BenchRow>),
}

impl RunOutput {
    pub fn len(&self) -> usize {
        match self {
            RunOutput::Records(r) => r.len(),
            RunOutput::Diagnostics(r) => r.len(),
            RunOutput::Bench(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes the rows as CSV with a header line.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        match self {
            RunOutput::Records(r) => records::write_rows(sink, &records::RECORD_FIELDS, r),
            RunOutput::Diagnostics(r) => records::write_rows(sink, &DIAGNOSTIC_FIELDS, r),
            RunOutput::Bench(r) => records::write_rows(sink, &BENCH_FIELDS, r),
        }
    }
}

/// Validates `cfg` and dispatches on its experiment kind.
pub fn run(cfg: &ExperimentConfig, opts: RunOptions) -> Result<RunOutput> {
    cfg.validate()?;
    Ok(match cfg.experiment {
        ExperimentKind::ApproxError => {
            RunOutput::Records(experiments::run_approx_error(cfg, opts)?)
        }
        ExperimentKind::Tradeoff => RunOutput::Records(experiments::run_tradeoff(cfg, opts)?),
        ExperimentKind::Diagnose => RunOutput::Diagnostics(experiments::run_diagnose(cfg, opts)?),
        ExperimentKind::BenchProducts => {
            RunOutput::Bench(experiments::run_bench_products(cfg, opts)?)
        }
    })
}
