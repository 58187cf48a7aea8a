use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index:?} out of bounds for grid {points:?}")]
    OutOfBounds {
        index: Vec<usize>,
        points: Vec<usize>,
    },

    #[error("velocity is not future-directed (u0 = {0})")]
    NotFutureDirected(f64),

    #[error("superluminal velocity |dq/dt| = {speed} >= c = {c}")]
    Superluminal { speed: f64, c: f64 },

    #[error("integration diverged at step {step}")]
    Divergence { step: usize },

    #[error("backend {backend} does not support potential of kind {kind}")]
    UnsupportedBackend {
        backend: &'static str,
        kind: &'static str,
    },

    #[error("grid has {points} points, quadrature guard allows at most {limit}")]
    GridGuard { points: usize, limit: usize },

    #[error("sampling condition violated: ratio {ratio} > 1 at epsilon {epsilon}")]
    Sampling { ratio: f64, epsilon: f64 },

    #[error("inconclusive order estimate: residuals {residuals:?} for eps {eps:?}")]
    InconclusiveOrder { eps: Vec<f64>, residuals: Vec<f64> },

    #[error("extrapolation did not converge: estimates {estimates:?}")]
    Convergence { estimates: Vec<(f64, f64)> },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("snapshot parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
