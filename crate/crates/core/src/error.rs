use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a closed-form expression.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration cannot be simulated as given.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A small-detector or paraxial validity condition does not hold.
    #[error("validity condition violated: {0}")]
    Validity(String),

    #[error("position ({x:.6e}, {y:.6e}) m lies outside the screen grid")]
    OutOfGrid { x: f64, y: f64 },

    /// An ensemble statistic cannot be formed from the available samples.
    #[error("degenerate estimate: {0}")]
    Degenerate(String),

    #[error("screen dump: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
