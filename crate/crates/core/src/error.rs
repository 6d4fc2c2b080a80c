use thiserror::Error;

pub type Result<T> = std::result::Result<T, ChaosError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChaosError {
    #[error("spectrum provides {available} eigenvalues, {needed} required")]
    InsufficientEigenvalues { needed: usize, available: usize },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid degree: {0}")]
    InvalidDegree(String),

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("function is not an eigenfunction of -L{0}")]
    NotEigenfunction(String),

    #[error("chaos precondition failed: {0}")]
    NotChaos(String),

    #[error("diffusion identity unavailable for non-diffusion model `{0}`")]
    NonDiffusion(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An internal cross-check disagreed. Never expected to fire.
    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),
}

impl ChaosError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        ChaosError::Parse {
            line,
            message: message.into(),
        }
    }
}
