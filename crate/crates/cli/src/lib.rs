//! Experiment harness: TOML scenario configs, figure presets, parallel
//! sweeps and CSV output with metadata sidecars.

pub mod compare;
pub mod config;
pub mod engine;
pub mod error;
pub mod output;
pub mod presets;

use std::path::{Path, PathBuf};

pub use config::ScenarioConfig;
pub use error::HarnessError;

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "FFMIRROR_WORKERS";

/// Sizes the global worker pool from [`WORKERS_ENV`] when it is set.
pub fn configure_workers() -> Result<(), HarnessError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| HarnessError::Config(format!("{WORKERS_ENV}={raw} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| HarnessError::Runtime(format!("worker pool: {e}")))
}

/// Executes a config and writes its tables, metadata and config copy.
pub fn run_config(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let tables = engine::execute(cfg)?;
    output::write_outputs(cfg, &tables, out)
}
