use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-range input.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The quadrature needs more panels than the configured cap.
    #[error("panel budget exceeded: {needed} panels needed, cap is {cap}")]
    BudgetExceeded { needed: usize, cap: usize },

    /// An operation was called outside the parameter range where it is defined.
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    /// Gram determinant vanishes (or is numerically zero) at the given configuration.
    #[error("singular configuration: G0 = {0}")]
    Singular(f64),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by bad user input rather than by the computation.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::InvalidInput(_))
    }
}
