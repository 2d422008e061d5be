//! Config-driven experiment runner for `metric-lab`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bundle;
pub mod config;
pub mod error;
pub mod expr;
pub mod runner;

pub use bundle::{load_bundle, Bundle, Format, Manifest};
pub use config::{parse_config, ExperimentConfig};
pub use error::{CliError, CliResult};
pub use runner::{certify_document, run_experiment, RunOptions, RunSummary};
