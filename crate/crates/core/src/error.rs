use thiserror::Error;

/// Errors produced by the frame, transport and geodesic routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("measure is not a probabilistic frame (lower frame bound {lower_bound:e})")]
    NotAFrame { lower_bound: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("weight adaptation stalled after {iterations} iterations (max mass error {max_error:e})")]
    AdaptationStalled {
        iterations: usize,
        max_error: f64,
        /// Best weights found before giving up.
        weights: Vec<f64>,
    },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// True for failures caused by the inputs rather than the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::InvalidArgument(_) | Error::NotAFrame { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
