//! Config-driven runner for the stabilizer: scenario files in, deterministic
//! `report.json`, `trace.csv` and `manifest.json` out.

pub mod config;
pub mod demo;
pub mod error;
pub mod run;
pub mod sweep;

pub use config::{Scenario, ScenarioConfig};
pub use demo::{demo_fixedpoint, DemoCase, DemoOutcome};
pub use error::CliError;
pub use run::{execute, run_scenario, trace_csv, Report, RunArtifacts};
pub use sweep::{sweep, SweepParam, SweepRow};

/// Environment variable holding the worker-thread cap (0 = one per core).
pub const THREADS_ENV: &str = "STABILIZER_THREADS";

/// Sizes the global rayon pool from [`THREADS_ENV`].
pub fn init_threads() -> Result<(), CliError> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map_err(|e| {
            CliError::config_msg(THREADS_ENV, format!("`{v}` is not a thread count: {e}"))
        })?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Failed(format!("cannot start thread pool: {e}")))
}
