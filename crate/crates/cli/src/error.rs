use std::io;
use std::path::PathBuf;

use dpse_core::descriptor::ModelError;
use dpse_core::oracle::OracleError;
use dpse_core::solver::SolverError;
use dpse_core::sparse::MtxError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("manifest {}: {message}", path.display())]
    Manifest { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Mtx {
        path: PathBuf,
        #[source]
        source: MtxError,
    },
    #[error("{0}")]
    Usage(String),
    #[error("report: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("generator gave up after {attempts} attempts: {reason}")]
    Generation { attempts: usize, reason: String },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

/// Exit status: 0 full convergence, 2 partial convergence, 1 input error.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INPUT: i32 = 1;
    pub const PARTIAL: i32 = 2;
}
