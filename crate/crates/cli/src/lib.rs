//! Experiment runner for disordered quantum walks: config handling, the
//! subcommands and their file outputs.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
