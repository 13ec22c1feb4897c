use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A denominator or guarded factor vanished; the payload names it.
    #[error("outside domain: {0} = 0")]
    Domain(String),
    #[error("word evaluation failed at generator {index}: {source}")]
    Word { index: usize, source: Box<Error> },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("term budget of {0} exceeded")]
    Budget(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: impl Into<String>) -> Error {
    Error::Domain(what.into())
}
