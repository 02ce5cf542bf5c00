//! `floquet` command-line front end: config resolution, runs, and output files.

pub mod angle;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use error::CliError;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "FLOQUET_THREADS";

/// Sizes the global rayon pool from [`THREADS_ENV`] when it is set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}
