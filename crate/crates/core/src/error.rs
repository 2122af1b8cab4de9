use std::path::PathBuf;
use std::sync::Arc;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("mesh topology error: {0}")]
    Topology(String),

    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("singular factorization ({detail}); relative residual {residual:e}")]
    SingularMatrix { detail: String, residual: f64 },

    #[error(
        "solver did not reach tolerance {tol:e} after {iterations} refinement steps; relative residual {residual:e}"
    )]
    NotConverged { residual: f64, tol: f64, iterations: usize },

    #[error("incompatible boundary data: net boundary flux {flux:e} exceeds 1e-8")]
    IncompatibleData { flux: f64 },

    #[error("discontinuous boundary trace at ({x}, {y}): jump {jump:e}")]
    DiscontinuousTrace { x: f64, y: f64, jump: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(Arc<std::io::Error>),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(Arc::new(e))
    }
}

impl Error {
    /// True for errors raised by the linear solver.
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::SingularMatrix { .. } | Error::NotConverged { .. })
    }
}
