use thiserror::Error;

/// Errors raised by algebra, state, model and estimation operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid algebra spec: {0}")]
    InvalidSpec(String),

    #[error("algebra spec mismatch: {left:?} vs {right:?}")]
    SpecMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("block {block} has shape {rows}x{cols}, expected {expected}x{expected}")]
    BlockShape {
        block: usize,
        rows: usize,
        cols: usize,
        expected: usize,
    },

    #[error("element is not self-adjoint (deviation {0:.3e})")]
    NotSelfAdjoint(f64),

    #[error("not a state: {0}")]
    InvalidState(String),

    #[error("tangent vector is not trace-free (trace {0:.3e})")]
    NotTangent(f64),

    #[error("tangent vectors are based at different states")]
    BaseMismatch,

    #[error("group element is not invertible (min singular value {0:.3e})")]
    NotInvertible(f64),

    #[error("vanishing normalization rho(g^dagger g) = {0:.3e}")]
    VanishingNormalization(f64),

    #[error("tangent leaves the orbit tangent space (forbidden component {residual:.3e})")]
    UnsolvableSld { residual: f64 },

    #[error("basis is rank deficient: rank {rank}, need {needed}")]
    RankDeficient { rank: usize, needed: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("point is outside the model domain: {0}")]
    OutOfDomain(String),

    #[error("measurement is not regular: min probability {min_prob:.3e} at {point:?}")]
    NotRegular { point: Vec<f64>, min_prob: f64 },

    #[error("size guard exceeded: {0}")]
    TooLarge(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("estimator is constant")]
    ConstantEstimator,

    #[error("estimator is not stationary (residual {residual:?})")]
    NonStationary { residual: Vec<f64> },

    #[error("matrix is singular or ill-conditioned (condition {condition:.3e})")]
    Singular { condition: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
