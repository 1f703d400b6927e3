use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A scenario or parameter set that violates a documented precondition.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument outside the domain of a closed-form expression.
    #[error("domain error: {0}")]
    Domain(String),

    // The wrapped errors are rendered inline rather than exposed as sources
    // so that error chains do not print the same message twice.
    #[error("i/o error: {0}")]
    Io(std::io::Error),

    #[error("csv error: {0}")]
    Csv(csv::Error),

    #[error("failed to parse config: {0}")]
    Parse(toml::de::Error),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e)
    }
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Parse(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn domain_err(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
