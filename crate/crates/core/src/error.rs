use thiserror::Error;

/// Errors raised by the analytic and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge on [{lower}, {upper}]: estimated error {estimated_error:e} after {subdivisions} subdivisions")]
    NonConvergence {
        lower: f64,
        upper: f64,
        estimated_error: f64,
        subdivisions: usize,
    },

    #[error("unstable queue: {0}")]
    Stability(String),

    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
