//! Command-line front end: configuration, experiment commands and file
//! output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{parse_sweep, ExperimentConfig, Mode, Sweep};
pub use error::CliError;
