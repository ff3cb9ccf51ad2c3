//! Experiment orchestration: the outer optimization loop, repetitions,
//! traces and summaries.

pub mod config;
pub mod experiment;
pub mod study;
pub mod summary;
pub mod trace;

pub use config::{BenchmarkId, ExperimentConfig, Method};
pub use experiment::{run_experiment, run_repetition, write_experiment, Benchmark, ExperimentResult, Metadata};
pub use summary::{summarize_dir, SummaryRow};
pub use trace::{read_trace, write_trace, TimingRow, TraceRow};
