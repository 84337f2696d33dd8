use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("moment generating function diverges: alpha {alpha} >= exponent supremum {limit}")]
    MgfDivergence { alpha: f64, limit: f64 },

    #[error("no-trade radius root not bracketed within log-gap {limit} (pool too shallow for the fixed cost)")]
    RootNotBracketed { limit: f64 },

    #[error("invariant violated at block {block}: {what}")]
    InvariantViolation { block: u64, what: String },

    #[error("empty observation set: {0}")]
    EmptySet(String),

    #[error("no observation carries a next-block gap (e_next)")]
    NoNextGap,

    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: PathBuf, column: String },

    #[error("{path}: row {row} (line {line}): {reason}")]
    BadRow {
        path: PathBuf,
        row: u64,
        line: u64,
        reason: String,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}

/// Rejects non-finite or negative values.
pub(crate) fn ensure_nonneg(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(name, format!("expected a finite value >= 0, got {v}")))
    }
}

pub(crate) fn ensure_positive(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(name, format!("expected a finite value > 0, got {v}")))
    }
}

pub(crate) fn ensure_finite(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(name, format!("expected a finite value, got {v}")))
    }
}
