//! Error type shared by all modules.

use thiserror::Error;

/// Failure modes of frame construction, linear algebra, measurement, and
/// integration routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("iteration cap exceeded: {0}")]
    ConvergenceFailure(String),
    #[error("singular or near-singular matrix: {0}")]
    Singular(String),
    #[error("degenerate basis: {0}")]
    DegenerateBasis(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("states or operators belong to different frames")]
    FrameMismatch,
    #[error("observable array is not Hermitian (defect {defect:.3e})")]
    NotPhysical { defect: f64 },
    #[error("ill-conditioned frame parameters: {0}")]
    IllConditioned(String),
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("integration step too large: {0}")]
    StepTooLarge(String),
    #[error("density matrix positivity violated (min eigenvalue {min_eig:.3e})")]
    PositivityViolation { min_eig: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 1 for input/validation problems,
    /// 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConvergenceFailure(_)
            | Error::Singular(_)
            | Error::PositivityViolation { .. } => 2,
            _ => 1,
        }
    }
}
