use thiserror::Error;

/// Errors raised by the symlab numerics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group descriptor: {0}")]
    InvalidGroup(String),

    #[error("group too large: {size} elements exceeds the enumeration cap of {cap}")]
    GroupTooLarge { size: usize, cap: usize },

    #[error("representation incompatible with group: {0}")]
    IncompatibleRepresentation(String),

    #[error("homomorphism check failed: max deviation {deviation:e} at elements ({g}, {h})")]
    NotHomomorphism { g: usize, h: usize, deviation: f64 },

    #[error("representation is not orthogonal: max deviation {deviation:e} at element {element}")]
    NotOrthogonal { element: usize, deviation: f64 },

    #[error("representations live on different groups")]
    GroupMismatch,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dense intertwiner storage cap exceeded: {entries} entries (cap {cap})")]
    StorageCap { entries: usize, cap: usize },

    #[error("n = {n} lies in the interpolation regime [d-1, d+1] for d = {d}")]
    InterpolationThreshold { n: usize, d: usize },

    #[error("factorization failed after jitter escalation (condition estimate {condition:e})")]
    Factorization { condition: f64 },

    #[error("learner is not invariant: perturbed retrain differs by {deviation:e}")]
    NonInvariantLearner { deviation: f64 },

    #[error("activation does not commute with layer representation {layer}: {reason}")]
    ActivationIncompatible { layer: usize, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed numeric matrix at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
