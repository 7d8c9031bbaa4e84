//! Command-line front end for the `dpse` solver: manifests, synthetic
//! system generation, solver runs, transfer-function sampling, method
//! benchmarks and plot data.

pub mod bench;
pub mod cli;
pub mod error;
pub mod gen;
pub mod manifest;
pub mod parse;
pub mod polemap;
pub mod poles;
pub mod spy;
pub mod tf;

pub use error::CliError;

/// Environment variable holding the worker count for per-shift solves.
pub const THREADS_ENV: &str = "DPSE_THREADS";

/// Sizes the global rayon pool from `DPSE_THREADS`, if set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n = match value.trim().parse::<usize>() {
        Ok(n) if n > 0 => n,
        _ => return Err(CliError::usage(format!("{THREADS_ENV} must be a positive integer, got {value:?}"))),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::usage(e.to_string()))
}
