//! Batch front end: configuration parsing, builtin initial data and the
//! experiment commands with their output files.

pub mod config;
pub mod data;
pub mod run;

pub use config::{parse_config, parse_config_with_overrides, Command, ConfigError, DataSpec, RunConfig};
pub use data::builtin_data;
pub use run::{run, RunError, RunStatus};
