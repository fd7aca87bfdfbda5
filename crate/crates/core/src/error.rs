use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spectral bounds: need 0 < m <= L, got m = {m}, L = {l}")]
    InvalidBounds { m: f64, l: f64 },

    #[error("degenerate spectrum (m = L = {m}); the shifted Chebyshev map is undefined")]
    DegenerateSpectrum { m: f64 },

    #[error("input must be nonnegative, got {0}")]
    NegativeInput(f64),

    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigenvalue {index} is not positive ({value})")]
    NonPositiveEigenvalue { index: usize, value: f64 },

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("mixture is not strongly convex: a' inv(Sigma) a = {value} >= 1")]
    MixtureNotStronglyConvex { value: f64 },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("non-finite feature at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },

    #[error("invalid label {value:?} at row {row}")]
    InvalidLabel { row: usize, value: String },

    #[error("dataset has no `label` column")]
    MissingLabelColumn,

    #[error("potential `{0}` does not provide an analytic Hessian")]
    NoHessian(String),

    #[error("Hessian is not symmetric (max asymmetry {max_asymmetry:e})")]
    AsymmetricHessian { max_asymmetry: f64 },

    #[error("Hessian is singular")]
    SingularHessian,

    #[error("Newton's method did not converge after {iterations} iterations (gradient norm {grad_norm:e})")]
    NoConvergence { iterations: usize, grad_norm: f64 },

    #[error("non-finite phase-space state after leapfrog step {step}")]
    NonFiniteState { step: usize },

    #[error("iteration {iteration}: integration time {time} is shorter than the leapfrog step {theta}")]
    StepTooLarge { iteration: usize, time: f64, theta: f64 },

    #[error("series is constant (zero variance)")]
    ConstantSeries,

    #[error("need at least {needed} samples, got {found}")]
    TooFewSamples { needed: usize, found: usize },

    #[error("index {index} out of range 1..={max}")]
    OutOfRange { index: usize, max: usize },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
