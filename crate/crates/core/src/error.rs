use thiserror::Error;

/// Errors raised by the algebra, geometry, transport and estimator layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point is off the manifold (distance {distance:e}, tolerance {tolerance:e})")]
    OffManifold { distance: f64, tolerance: f64 },

    #[error("numerically singular map (condition estimate {condition:e})")]
    NumericalSingularity { condition: f64 },

    #[error("step too large: {0}")]
    StepTooLarge(String),

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures that come from the numerics rather than from the
    /// caller's configuration.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalSingularity { .. } | Error::StepTooLarge(_) | Error::Internal(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
