//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors reported by model construction and the numerical operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input violates a documented domain restriction.
    #[error("domain error: {0}")]
    Domain(String),

    /// A state identifier is not part of the decision problem.
    #[error("unknown state `{0}`")]
    UnknownState(String),

    /// An action identifier is not part of the relevant menu.
    #[error("menu violation: `{action}` is not available in menu `{menu}`")]
    MenuViolation { menu: String, action: String },

    /// A scenario or configuration document could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Demand is unbounded because the per-unit price is zero.
    #[error("unbounded demand: per-unit price must be positive")]
    UnboundedDemand,

    /// A bracketing root finder did not receive a sign change.
    #[error("bracket failure: {0}")]
    Bracket(String),

    /// A documented precondition of an operation is not met.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Too few classified samples to fit the requested object.
    #[error("under-determined fit: {0}")]
    UnderDetermined(String),

    /// The choice data do not pin down the requested parameter.
    #[error("unidentified: {0}")]
    Unidentified(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
