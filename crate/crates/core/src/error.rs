use thiserror::Error;

/// Errors raised by constructors, checkers and builders.
///
/// Measured quantities are carried as `f64` regardless of the scalar type so
/// that one error type serves every instantiation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: asymmetry norm {asymmetry:e}")]
    NotHermitian { asymmetry: f64 },
    #[error("matrix is singular: smallest pivot or eigenvalue modulus {measured:e}")]
    Singular { measured: f64 },
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("unitary part is not unitary: ||U U* - I|| = {residual:e}")]
    NotUnitary { residual: f64 },
    #[error("antilinear square sign mismatch: ||U conj(U) - eps I|| = {residual:e}")]
    SquareSign { residual: f64 },
    #[error("span closure exceeded {max_dim} dimensions (reached {reached})")]
    ClosureTooLarge { max_dim: usize, reached: usize },
    #[error("algebra basis invalid: {0}")]
    InvalidBasis(String),
    #[error("grading invalid: {what} residual {residual:e}")]
    InvalidGrading { what: &'static str, residual: f64 },
    #[error("summands do not add up to D: ||sum D_l - D|| = {gap:e}")]
    SummandSum { gap: f64 },
    #[error("twist {index} is ill-conditioned: condition number {condition:e} exceeds {bound:e}")]
    IllConditionedTwist { index: usize, condition: f64, bound: f64 },
    #[error("{what} is not in the algebra: membership residual {residual:e}")]
    NotInAlgebra { what: String, residual: f64 },
    #[error("{what} is not positive: min eigenvalue {min:e}, max eigenvalue {max:e}")]
    NotPositive { what: String, min: f64, max: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn mismatch(expected: impl ToString, found: impl ToString) -> Error {
    Error::DimensionMismatch {
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
