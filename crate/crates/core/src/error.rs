use std::io;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch between {left:?} and {right:?}")]
    Dimension {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("parameter `{name}` has a non-finite gradient")]
    Divergence { name: String },

    #[error("non-finite training loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("did not converge after {sweeps} sweeps (largest coefficient change {residual:e})")]
    Convergence { sweeps: usize, residual: f64 },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("artifact container: {0}")]
    Container(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the command-line driver.
    ///
    /// 2 usage/config, 3 data validation, 4 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Validation(_) | Error::Parse(_) | Error::Container(_) | Error::Io(_) | Error::Csv(_) => 3,
            Error::Dimension { .. }
            | Error::Contract(_)
            | Error::Divergence { .. }
            | Error::NonFiniteLoss { .. }
            | Error::Convergence { .. } => 4,
        }
    }

    pub(crate) fn dim(op: &'static str, left: (usize, usize), right: (usize, usize)) -> Self {
        Error::Dimension { op, left, right }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
