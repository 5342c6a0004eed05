use thiserror::Error;

/// Errors raised by constructors and validators across the crate.
///
/// Invariant violations carry the name of the violated invariant so that
/// callers (in particular the CLI) can report which physical condition failed.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("no closed form; use quadrature")]
    NoClosedForm,
    #[error("channel spec parse error: {0}")]
    SpecParse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    pub fn out_of_range(msg: impl Into<String>) -> Self {
        Error::OutOfRange(msg.into())
    }
}
