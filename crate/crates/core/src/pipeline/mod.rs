//! End-to-end runs, sweeps and figure exports.

mod config;
mod histogram;
mod run;

pub use config::{RunConfig, SweepSpec};
pub use histogram::{export_histogram, histogram_summary, HistogramSummary};
pub use run::{run_pipeline, run_sweep, OperatingPoint, RowMetrics, RunReport, SweepResult, SweepRow};
