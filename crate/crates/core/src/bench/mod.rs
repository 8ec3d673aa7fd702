//! Benchmark harness: configuration, time loop and reports.

pub mod config;
pub mod report;
pub mod run;

pub use config::{parse_config, parse_config_str, ProblemKind, RunConfig};
pub use report::{RunReport, StepRow, Summary};
pub use run::{run_benchmark, sweep, Benchmark};
