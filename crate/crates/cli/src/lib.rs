//! Command-line driver for `qsdc-core`: configuration loading, the `run`,
//! `attack-sweep`, `cost-compare` and `oracle-check` subcommands, and report
//! rendering.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use error::CliError;
