//! Library half of the `arexit` command-line tool: config parsing, the
//! subcommands and their reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod verify;

pub use config::{Format, RunConfig};
pub use error::CliError;
pub use report::Report;
