use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violates its documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// The argument lies outside the region where the method is defined.
    #[error("outside domain: {0}")]
    Domain(String),
    /// A series hit its term cap before meeting the tolerance.
    #[error("{what} did not converge within {terms} terms")]
    NonConvergence { what: &'static str, terms: usize },
    /// An adaptive rule could not reach the requested tolerance.
    #[error("quadrature failed for {what}: estimate {value:e}, error {error:e}")]
    Quadrature { what: &'static str, value: f64, error: f64 },
    /// Cancellation destroyed more digits than the tolerance allows.
    #[error("precision loss in {what}: {detail}")]
    PrecisionLoss { what: &'static str, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
