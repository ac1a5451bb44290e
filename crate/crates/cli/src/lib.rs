//! Configuration-driven experiment runner.
//!
//! An experiment is one TOML file naming a model, a check and its inputs.
//! [`run_experiment`] executes the check; [`report::emit_report`] writes the
//! JSON report and the CSV summary row.

pub mod checks;
pub mod config;
pub mod report;

use std::path::{Path, PathBuf};

pub use config::{CheckKind, ConfigError, Experiment, ExperimentConfig, Overrides};
pub use report::Outcome;

/// Environment variable fixing the worker thread count.
pub const THREADS_ENV: &str = "LFOT_THREADS";

/// Exit status for configuration and I/O errors.
pub const EXIT_CONFIG: i32 = 3;

pub fn run_experiment(exp: &Experiment) -> Outcome {
    checks::run(exp)
}

/// Output prefix of a validated experiment.
pub fn output_prefix(exp: &Experiment) -> Result<&Path, ConfigError> {
    exp.config
        .out
        .as_deref()
        .ok_or_else(|| ConfigError::Invalid("no output prefix: set `out` or pass --out".into()))
}

/// Runs the experiment and writes its reports, returning the outcome and
/// the written paths.
pub fn run_and_emit(exp: &Experiment) -> Result<(Outcome, PathBuf, PathBuf), RunError> {
    let prefix = output_prefix(exp)?.to_path_buf();
    let outcome = run_experiment(exp);
    let (json, csv) = report::emit_report(&prefix, exp, &outcome)?;
    Ok((outcome, json, csv))
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}
