use thiserror::Error;

/// Errors raised by the numerical layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not positive semi-definite (smallest eigenvalue {0:.3e})")]
    NotPositiveSemiDefinite(f64),

    #[error("zero operator where a nonzero one is required")]
    ZeroOperator,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dense representation of a dim-{dim} superoperator exceeds the size guard ({max})")]
    TooLargeForDense { dim: usize, max: usize },

    #[error("Liouvillian and metric do not commute (residual {0:.3e})")]
    NonCommuting(f64),

    #[error("autocorrelation ratio {0} exceeds the unit interval beyond tolerance")]
    RatioOutOfRange(f64),

    #[error("operator is fully stationary (remaining norm^2 {0:.3e})")]
    FullyStationary(f64),

    #[error("seminorm not preserved along the path: sample {index} drifts by {drift:.3e}")]
    NormNotPreserved { index: usize, drift: f64 },

    #[error("path times must be strictly increasing (violated at sample {0})")]
    NonIncreasingTimes(usize),

    #[error("empty path")]
    EmptyPath,

    #[error("kernel intersection is rank deficient (Gram condition {0:.3e})")]
    RankDeficient(f64),

    #[error("step size underflow at l = {l} (h = {h:.3e})")]
    StepUnderflow { l: f64, h: f64 },

    #[error("step budget of {0} exhausted")]
    StepBudget(usize),

    #[error("invariant '{name}' violated: drift {drift:.3e} exceeds {limit:.3e} at l = {l}")]
    InvariantViolation {
        name: &'static str,
        drift: f64,
        limit: f64,
        l: f64,
    },

    #[error("operation not applicable: {0}")]
    NotApplicable(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
