//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors produced by solvers, builders and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix/vector shapes are incompatible for the requested operation.
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: String,
        actual: String,
    },

    /// A numerical kernel failed to converge (SVD, eigendecomposition).
    #[error("numerical failure in {0}: decomposition did not converge")]
    NumericalFailure(&'static str),

    /// A solver iterate became non-finite.
    #[error("numerical divergence: variable {variable} became non-finite at iteration {iteration}")]
    Divergence {
        variable: &'static str,
        iteration: usize,
    },

    /// Gram matrix is singular and no regularization was requested.
    #[error("singular Gram matrix with gamma = 0; use gamma > 0 to regularize")]
    SingularGram,

    /// Invalid parameter or input value.
    #[error("invalid input: {0}")]
    Validation(String),

    /// A ratio with an all-zero denominator.
    #[error("undefined ratio: {0}")]
    UndefinedRatio(&'static str),

    /// Text-format parse failure, with the 1-based line number.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// One experiment trial failed; the index identifies which.
    #[error("trial {trial} failed")]
    TrialFailed {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dimension(
        context: &'static str,
        expected: impl Into<String>,
        actual: impl Into<String>,
    ) -> Self {
        Error::Dimension {
            context,
            expected: expected.into(),
            actual: actual.into(),
        }
    }
}
