use thiserror::Error;

/// Errors raised by the error-probability library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("symbol index {index} out of range for constellation size {m_size}")]
    SymbolOutOfRange { index: usize, m_size: usize },

    #[error("expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error(
        "exact alternating sum refused at SF={sf} (limit SF={max_sf}); \
         binomial cancellation makes it untrustworthy without an explicit override"
    )]
    PrecisionLimit { sf: u32, max_sf: u32 },

    #[error(
        "quadrature did not converge within {subdivisions} subdivisions \
         (estimate {estimate:e}, error estimate {error_estimate:e})"
    )]
    QuadratureBudget {
        subdivisions: usize,
        estimate: f64,
        error_estimate: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
