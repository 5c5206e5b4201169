use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("constant `{0}` is parametric in delta and needs a delta value")]
    MissingDelta(String),
    #[error("constant `{0}` takes no delta")]
    UnexpectedDelta(String),
    #[error("delta {delta} outside the domain of `{name}`: {reason}")]
    DeltaOutOfDomain { name: String, delta: f64, reason: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("absorption fails at delta {delta}: C1*C14 upper bound {product} >= 1")]
    AbsorptionFailure { delta: f64, product: f64 },
    #[error("field is not mean zero: |mean| = {mean:e}, L2 norm = {norm:e}")]
    NotMeanZero { mean: f64, norm: f64 },
    #[error("metric is singular or indefinite at grid index {index}")]
    SingularMetric { index: usize },
    #[error("solver stopped after {iterations} of at most {max_iter} iterations at relative residual {residual:e}")]
    NoConvergence { iterations: usize, max_iter: usize, residual: f64 },
    #[error("right-hand side vanishes identically")]
    DegenerateRhs,
    #[error("right-hand side violates the compatibility condition: integral {integral:e}")]
    IncompatibleRhs { integral: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("dependency cycle through `{0}`")]
    Cycle(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
