use thiserror::Error;

/// Errors raised by model construction, metric evaluation and loss integration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset contains a single class (class {present} only)")]
    SingleClassDataset { present: u8 },
    #[error("score at row {row} is not finite")]
    NonFiniteScore { row: usize },
    #[error("label at row {row} must be 0 or 1, got {value:?}")]
    InvalidLabel { row: usize, value: String },
    #[error("scores must lie in [{lo}, {hi}] for this operation (found {found})")]
    ScoresOutOfUnitRange { lo: f64, hi: f64, found: f64 },
    #[error("rate {0} is outside [0, 1]")]
    InvalidRate(f64),
    #[error("operating condition {0} is outside [0, 1]")]
    InvalidCondition(f64),
    #[error("invalid method spec {0:?}")]
    InvalidMethodSpec(String),
    #[error("invalid weight spec {0:?}")]
    InvalidWeightSpec(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("all scores are equal; evenly spaced transform needs at least two distinct scores")]
    DegenerateSingleScore,
    #[error("both class densities vanish at T = {0}")]
    ZeroDensityPoint(f64),
    #[error("model is not convex: c(T) decreases near T = {at}")]
    NonConvexModel { at: f64 },
    #[error("operation requires piecewise-polynomial densities")]
    UnsupportedDensity,
    #[error("method {0} has no population expected loss here")]
    UnsupportedMethod(String),
    #[error("unknown model name {0:?}")]
    UnknownModelName(String),
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("quadrature did not converge on [{a}, {b}] (error estimate {error:e})")]
    QuadratureFailure { a: f64, b: f64, error: f64 },
    #[error("csv line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by malformed or unsuitable input rather than by a failed computation.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::QuadratureFailure { .. } | Error::NonConvexModel { .. } | Error::ZeroDensityPoint(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
