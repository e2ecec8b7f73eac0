//! Batch front-end for topoloc: TOML experiment configs in, CSV tables and
//! JSON metadata out.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod validate;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
