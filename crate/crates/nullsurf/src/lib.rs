//! File formats and the command-line front end for `nullsurf-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::Path;

pub mod cli;
pub mod commands;
pub mod config;
pub mod io;

/// Process exit codes: a stable contract.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const NOT_TIMELIKE: i32 = 2;
    pub const SOLVER: i32 = 3;
    pub const RECONSTRUCTION: i32 = 4;
    pub const VERIFICATION: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error(transparent)]
    Core(#[from] nullsurf_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub fn csv(path: &Path, source: csv::Error) -> Self {
        CliError::Csv { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Csv { .. } => exit::USAGE,
            CliError::Core(e) => e.exit_code(),
        }
    }
}
