//! Experiment runner: trains each method on each dataset across seeds,
//! aggregates per-metric statistics, runs significance tests with FDR
//! correction, and emits reports.

pub mod config;
pub mod report;
pub mod runner;
pub mod stats;

pub use config::{DatasetSpec, ExperimentConfig, MethodSettings};
pub use runner::{run, RunOutcome, RunResult};
pub use stats::{benjamini_hochberg, welch_t_test, Comparison, TTestKind};
