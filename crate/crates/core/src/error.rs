use thiserror::Error;

/// Errors raised by the simulation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// An input violates a structural precondition of the operation.
    #[error("contract violation: {0}")]
    Contract(String),
    /// A state was annihilated (squared norm below the zero threshold).
    #[error("state has zero norm (norm^2 = {norm_sqr:e})")]
    ZeroNormState { norm_sqr: f64 },
    /// The sLOCC post-selection has vanishing success probability.
    #[error("post-selection impossible (probability = {probability:e})")]
    PostSelectionImpossible { probability: f64 },
    /// An iterative solver failed to converge.
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
