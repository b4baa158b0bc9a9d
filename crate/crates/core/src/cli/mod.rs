//! The `nml` command-line driver.
//!
//! Every subcommand writes its CSV/JSON artifacts atomically and prints a
//! one-line JSON summary on stdout. Exit codes: 0 success, 2 usage,
//! 3 numerical failure, 4 I/O.

mod commands;
mod config;
mod output;

use thiserror::Error;

pub use commands::{diagnostics_json, run, MARKOV_TOLERANCE};
pub use config::{Cli, Command, RunSpec, Sweep, SweepParameter, FIGURE_GAMMA, FIGURE_LAMBDA};
pub use output::{
    curve_from_rows, format_number, read_csv, render_csv, round12, trajectory_rows, write_atomic,
    CsvRow, Curve, CSV_HEADER,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Resolves flags and config, runs the job and returns the stdout summary.
pub fn execute(cli: Cli) -> Result<serde_json::Value, CliError> {
    let spec = RunSpec::from_cli(cli)?;
    run(&spec)
}
