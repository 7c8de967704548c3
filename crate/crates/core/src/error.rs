use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite argument: {0}")]
    NonFinite(&'static str),
    #[error("correlation must lie strictly inside (-1, 1), got {0}")]
    Correlation(f64),
    #[error("matrix is not invertible (|det| = {0:e})")]
    Singular(f64),
    #[error("contamination level must lie in [0, 1], got {0}")]
    Beta(f64),
    #[error("contaminating law and base law must differ")]
    IdenticalLaws,
    #[error("order {0} outside [0, 2]")]
    Order(usize),
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
