use thiserror::Error;

use crate::algebra::AlgebraShape;
use crate::hadamard::VerificationReport;
use crate::io::FileError;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the library. Every variant maps to a stable code via
/// [`Error::code`], which the command line front end reports verbatim.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch {
        left: AlgebraShape,
        right: AlgebraShape,
    },

    #[error("invalid algebra shape: {0}")]
    InvalidShape(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} is not unitary (residual {residual:.3e})")]
    NotUnitary { what: String, residual: f64 },

    #[error("{what} is not central (residual {residual:.3e})")]
    NotCentral { what: String, residual: f64 },

    #[error("dephasing requires a commutative algebra, got shape {0}")]
    NonCommutativeShape(AlgebraShape),

    #[error("hypothesis failed: {hypothesis} (residual {residual:.3e} at {location})")]
    HypothesisFailed {
        hypothesis: String,
        residual: f64,
        location: String,
    },

    #[error("input is not an Hadamard matrix at tolerance {}", .0.tolerance)]
    NotHadamard(Box<VerificationReport>),

    #[error("moment matrix dimension {dim} exceeds cap {cap}")]
    CapExceeded { dim: usize, cap: usize },

    #[error("sum is not vanishing: |a+b+c| = {norm:.3e}")]
    NonVanishingSum { norm: f64 },

    #[error("product layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("unknown {kind} '{name}'")]
    UnknownStrategy { kind: &'static str, name: String },

    #[error("eigenvalue iteration did not converge for a matrix of dimension {dim}")]
    EigenNotConverged { dim: usize },

    #[error(transparent)]
    File(#[from] FileError),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::ShapeMismatch { .. } => "SHAPE_MISMATCH",
            Error::InvalidShape(_) => "INVALID_SHAPE",
            Error::DimensionMismatch(_) => "DIM_MISMATCH",
            Error::NotSquare { .. } => "NOT_SQUARE",
            Error::InvalidTolerance(_) => "INVALID_TOLERANCE",
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
            Error::NotUnitary { .. } => "NOT_UNITARY",
            Error::NotCentral { .. } => "NOT_CENTRAL",
            Error::NonCommutativeShape(_) => "NON_COMMUTATIVE_SHAPE",
            Error::HypothesisFailed { .. } => "HYPOTHESIS_FAILED",
            Error::NotHadamard(_) => "NOT_HADAMARD",
            Error::CapExceeded { .. } => "CAP_EXCEEDED",
            Error::NonVanishingSum { .. } => "NON_VANISHING_SUM",
            Error::LayoutMismatch(_) => "LAYOUT_MISMATCH",
            Error::UnknownStrategy { .. } => "UNKNOWN_STRATEGY",
            Error::EigenNotConverged { .. } => "EIGEN_NOT_CONVERGED",
            Error::File(e) => e.code(),
        }
    }

    /// True when the error reports a failed mathematical check on otherwise
    /// well-formed input, as opposed to malformed input or bad arguments.
    pub fn is_verification_failure(&self) -> bool {
        matches!(
            self,
            Error::NotUnitary { .. }
                | Error::NotCentral { .. }
                | Error::NonCommutativeShape(_)
                | Error::HypothesisFailed { .. }
                | Error::NotHadamard(_)
                | Error::NonVanishingSum { .. }
                | Error::LayoutMismatch(_)
        )
    }
}

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(tol))
    }
}
