use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed scalar {0:?}")]
    MalformedScalar(String),

    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("backend mismatch: expected {expected}, found {found}")]
    BackendMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("singular matrix (pivot column {column})")]
    Singular { column: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("generator index {k} out of range 1..={max}")]
    IndexOutOfRange { k: usize, max: usize },

    #[error("matrix is not an involution")]
    NotInvolution,

    #[error("root finder did not converge (worst residual {worst_residual:e})")]
    NoConvergence { worst_residual: f64 },

    #[error("algebra closure exceeded its bound ({0})")]
    ClosureOverflow(String),

    #[error("witness failed the invariance check: {0}")]
    WitnessRejected(String),

    #[error("invalid JSON: {0}")]
    Json(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
