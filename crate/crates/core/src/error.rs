use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("factor index {index} out of range for {len} factors")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("operator is not Hermitian (max defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid assemblage: {0}")]
    InvalidAssemblage(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("input {input} has zero probability")]
    ZeroProbabilityInput { input: usize },

    #[error("unsupported input: {0}")]
    UnsupportedInput(String),

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("precondition not met: {0}")]
    PreconditionUnmet(String),

    /// A provider could not produce a local model. This is never a steering claim.
    #[error("model not found for slot {slot}: {reason}")]
    ModelNotFound { slot: usize, reason: String },

    #[error("pattern not resolvable: {0}")]
    PatternUnresolvable(String),
}
