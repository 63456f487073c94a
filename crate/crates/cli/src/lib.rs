//! Command-line front end for `bnpmi-core`: CSV ingestion, the `estimate`,
//! `test`, `elicit` and `simulate` subcommands, and their JSON/CSV reports.

pub mod args;
pub mod commands;
pub mod config;
pub mod data;
mod error;
pub mod report;

pub use error::{CliError, CliResult};
