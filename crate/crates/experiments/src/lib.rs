//! Config-driven runner for the critical-metrology experiments: parses
//! TOML configurations, evaluates grid cells in parallel on the
//! closed-form and Fock-space engines, and writes CSV datasets with a JSON
//! metadata line.

// `!(x < bound)` rejects NaN together with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dataset;
pub mod experiments;
pub mod fit;
pub mod runner;

pub use config::{ConfigError, EngineSelection, ExperimentConfig, ExperimentId};
pub use dataset::{Column, Dataset, DatasetError};
pub use fit::{fit_loglog_slope, SlopeFit};
pub use runner::{run, sweep_map, FailedCell, RunError, RunOutcome};
