//! Command-line front end for `hwdims`: CSV ingestion, TOML run
//! configuration, saved fits and the `fit`, `forecast`, `decompose` and
//! `evaluate` commands.

pub mod artifact;
pub mod config;
pub mod error;
pub mod ingest;
pub mod run;

pub use error::{CliError, CliResult};
pub use run::{execute, main_with, Cli, Command};
