//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by the solvers and the document layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid signature: m1 = {m1}, m2 = {m2} (both must be >= 1)")]
    InvalidSignature { m1: usize, m2: usize },

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: String,
        got: String,
    },

    #[error("matrix is not Hermitian: relative asymmetry {residual:.3e} exceeds {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("matrix is not positive definite: smallest eigenvalue {min_eig:.3e}")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("matrix is not j-unitary: relative residual {residual:.3e} exceeds {tol:.3e}")]
    NotJUnitary { residual: f64, tol: f64 },

    #[error("matrix is not strictly contractive: spectral norm {norm}")]
    NotContractive { norm: f64 },

    #[error("decomposition residual {residual:.3e} exceeds {tol:.3e}; input is outside the class")]
    DecompositionResidual { residual: f64, tol: f64 },

    #[error("singular matrix encountered in {0}")]
    Singular(&'static str),

    #[error("evaluation point rejected: {0}")]
    BadPoint(String),

    #[error("parameter out of range: {0}")]
    BadParameter(String),

    #[error("Taylor data inadmissible at level {level}: smallest eigenvalue of S is {min_eig:.3e}")]
    InadmissibleTaylor { level: usize, min_eig: f64 },

    #[error("recovered matrix at level {level} failed class checks: {source}")]
    RecoveryBreakdown {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("document validation failed: {0}")]
    Document(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 1 for validation problems,
    /// 2 for numerical failures discovered during computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidSignature { .. }
            | Error::Dimension { .. }
            | Error::BadParameter(_)
            | Error::Document(_)
            | Error::NotHermitian { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::NotJUnitary { .. }
            | Error::NotContractive { .. }
            | Error::Io(_)
            | Error::Json(_) => 1,
            Error::DecompositionResidual { .. }
            | Error::Singular(_)
            | Error::BadPoint(_)
            | Error::InadmissibleTaylor { .. }
            | Error::RecoveryBreakdown { .. } => 2,
        }
    }
}
