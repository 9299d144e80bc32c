//! Command implementations behind the `geoprod` binary.
//!
//! Every command writes its primary output to a caller-supplied writer so the
//! binary and the tests share one code path.

pub mod commands;
pub mod report;
pub mod spec;

use thiserror::Error;

pub use report::{CheckResult, RunReport};
pub use spec::{Space, SpaceSpec};

/// Exit status for a run whose checks all passed.
pub const EXIT_OK: i32 = 0;
/// Exit status for a failed check.
pub const EXIT_CHECK: i32 = 1;
/// Exit status for malformed input.
pub const EXIT_INPUT: i32 = 2;

/// Environment variable overriding every verification threshold.
pub const TOL_ENV: &str = "GEOPROD_TOL";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] geoprod::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_INPUT
    }
}

/// Reads [`TOL_ENV`] if set.
pub fn tolerance_from_env() -> Result<Option<f64>, CliError> {
    match std::env::var(TOL_ENV) {
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(t) if t > 0.0 && t.is_finite() => Ok(Some(t)),
            _ => Err(CliError::Input(format!("{TOL_ENV} must be a positive number, got {s:?}"))),
        },
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Input(format!("{TOL_ENV}: {e}"))),
    }
}
