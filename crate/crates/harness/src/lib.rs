//! Experiment harness for Granger causality on compressed sparse signals.
//!
//! Experiments are registered by name in [`experiments::experiment_registry`]
//! and driven by JSON configuration files; results are written as versioned
//! CSV, JSON and SVG files.

pub mod config;
pub mod error;
pub mod experiments;
pub mod ingest;
pub mod output;
pub mod pair;
pub mod plot;
pub mod verify;

pub use config::{ExperimentConfig, ExperimentKind, MatrixChoice};
pub use error::{HarnessError, Result};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "CS_CAUSALITY_WORKERS";

/// Worker count: the environment variable wins over the configured value,
/// which wins over the number of available cores.
pub fn worker_count(configured: Option<usize>) -> Result<usize> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        return match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(HarnessError::Config(format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))),
        };
    }
    Ok(configured.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)))
}

/// Runs `f` inside a thread pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Experiment(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}
