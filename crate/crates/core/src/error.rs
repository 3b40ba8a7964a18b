use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("diffusion tensor is not symmetric: |M{row}{col} - M{col}{row}| = {gap:e} exceeds relative tolerance")]
    Asymmetric { row: usize, col: usize, gap: f64 },

    #[error("diffusion tensor is not coercive: smallest eigenvalue {lambda:e} <= 0")]
    NotCoercive { lambda: f64 },

    #[error("field shape mismatch: expected {expected:?}, got {found:?}")]
    ShapeMismatch {
        expected: [usize; 3],
        found: [usize; 3],
    },

    #[error("source location {location:?} is not at least two cells inside the domain")]
    SourceOutsideDomain { location: [f64; 3] },

    #[error("linear solver did not converge in {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("incompatible Neumann right-hand side: mean {mean:e} vs norm {norm:e}")]
    IncompatibleRhs { mean: f64, norm: f64 },

    #[error("non-finite value in `{field}` at step {step}")]
    NonFinite { step: usize, field: &'static str },

    #[error("time step {dt:e} exceeds the stability limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("{0}")]
    Diagnostics(String),

    #[error("config line {line}: `{key}`: {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn config(line: usize, key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerical scheme itself (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::IncompatibleRhs { .. }
                | Error::NonFinite { .. }
                | Error::CflViolation { .. }
        )
    }
}
