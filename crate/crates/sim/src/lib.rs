//! Std companion of `mpox-core`: JSON run specifications, built-in
//! presets, multi-threaded ensembles, CSV/JSON outputs and the `mpox` CLI.

#![deny(missing_docs)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod parallel;
pub mod presets;
pub mod report;
pub mod run;

pub use config::{parse_config, ConfigError, RunSpec, SchemaError, ValidationError};
pub use parallel::run_ensemble;
pub use report::AnalysisReport;
pub use run::{run_scenario, RunError, RunManifest, RunOptions, RunOutcome};
