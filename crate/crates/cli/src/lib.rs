//! Command-line driver for the `amm-track-core` experiments.
//!
//! Each subcommand resolves a [`config::RunConfig`], runs one experiment and
//! writes plot-ready files plus the resolved configuration into the output
//! directory. Reruns with the same configuration produce identical bytes.

pub mod commands;
pub mod config;
pub mod output;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(amm_track_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 for a runtime invariant violation, 2 for everything the user can
    /// fix by changing inputs.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(amm_track_core::Error::InvariantViolation { .. }) => 1,
            _ => 2,
        }
    }
}

impl From<amm_track_core::Error> for CliError {
    fn from(e: amm_track_core::Error) -> Self {
        CliError::Core(e)
    }
}
