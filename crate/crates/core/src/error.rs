use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alpha must be positive and finite, got {0}")]
    AlphaNotPositive(f64),
    #[error("alpha = 1 is the exponential-family limit and has no power-law form")]
    AlphaIsOne,
    #[error("alpha = {alpha} is outside the Student-t domain alpha > {bound} for d = {dim}")]
    AlphaBelowStudentBound { alpha: f64, dim: usize, bound: f64 },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("covariance matrix is not symmetric (max deviation {deviation:e})")]
    NotSymmetric { deviation: f64 },
    #[error("covariance matrix is not positive definite (eigenvalue ratio {ratio:e})")]
    NotPositiveDefinite { ratio: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("sample batch is empty")]
    EmptyBatch,
    #[error("ragged sample: observation {index} has length {got}, expected {expected}")]
    RaggedBatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("score is undefined at a point on or outside the support")]
    UndefinedScore,
    #[error("degenerate statistics: zero denominator in {0}")]
    DegenerateStatistics(&'static str),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error(
        "quadrature did not converge: estimate {estimate:e}, error {error:e} after {intervals} intervals"
    )]
    QuadratureFailed {
        estimate: f64,
        error: f64,
        intervals: usize,
    },
}

impl Error {
    /// True for failures of a numerical routine, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::QuadratureFailed { .. })
    }
}
