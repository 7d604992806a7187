//! Named experiments over the network steering toolkit, with CSV and JSON
//! reports for plotting.

pub mod commands;
pub mod fixture;
pub mod output;
pub mod report;
pub mod spec;

pub use commands::{
    cmd_activation_sweep, cmd_claims_demo, cmd_nlhs, cmd_verify_swap, fuzz_soundness, AxesPreset, NlhsOptions,
};
pub use fixture::{Fixture, PatternName};
pub use report::{Check, ExperimentReport, Format};
pub use spec::{boundary_eta, EtaSpec, Range, SweepSpec};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Core(#[from] netsteer_core::Error),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("fixture error: {0}")]
    Fixture(String),
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
    #[error("thread pool: {0}")]
    Threads(String),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "NETSTEER_THREADS";

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool
/// when `threads` is `None`. Grid results are collected in grid order, so
/// the output does not depend on the worker count.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| ExperimentError::Threads(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}
