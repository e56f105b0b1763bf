use thiserror::Error;

/// Errors raised while validating model parameters or running experiments.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("path-loss exponent alpha = {alpha} must exceed 2 for K_alpha to converge")]
    DivergentIntegral { alpha: f64 },

    #[error("group size k0 must be positive to evaluate the out-transfer capture probability")]
    UndefinedGroup,

    #[error("degenerate experiment: {0}")]
    Degenerate(String),
}

impl ModelError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        ModelError::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, ModelError>;
