//! Experiment harness for the `cliplab` optimizers: TOML-configured runs,
//! parameter sweeps, verification suites, landscape profiling and the
//! limiting-loss calculator. Every command writes CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod csvio;
pub mod error;
pub mod experiment;
pub mod sweep;
pub mod verify;
pub mod limit;
pub mod presets;
pub mod profile;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
