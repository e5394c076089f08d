//! Configuration loading, run orchestration and file outputs for the
//! `repeater` command.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{load_config, parse_config, RunConfig};
pub use error::{CliError, Result};
