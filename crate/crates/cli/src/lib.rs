//! Command-line front end for `trimode`: configuration parsing, subcommand
//! dispatch and JSON/CSV reports.

pub mod cli;
pub mod config;
pub mod run;

pub use config::{parse_config, ConfigError, RunConfig};
pub use run::{run, Command, Report, RunError};
