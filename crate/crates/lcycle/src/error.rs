use thiserror::Error;

/// Library-wide error type. The `kind` string is stable and is what the CLI
/// reports in its machine-readable error JSON.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside an operation's documented domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A length-set specification string could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
    /// The (n, M) pair falls in a regime with no supported prediction
    /// (supercritical inputs are rejected, not approximated).
    #[error("unsupported regime: {0}")]
    Regime(String),
    /// A numerical evaluation produced a result that fails its own sanity
    /// checks (negative probability, imaginary residue too large, ...).
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Parse(_) => "parse",
            Error::Regime(_) => "regime",
            Error::Numeric(_) => "numeric",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

pub(crate) fn numeric(msg: impl Into<String>) -> Error {
    Error::Numeric(msg.into())
}
