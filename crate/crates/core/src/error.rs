use thiserror::Error;

/// Errors raised by the channel-estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated an operation's precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A scenario or sweep configuration is inconsistent. `keys` names every
    /// offending configuration key.
    #[error("configuration error [{keys}]: {message}")]
    Config { keys: String, message: String },

    /// A factorization or solve failed even after regularization.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(keys: &[&str], message: impl Into<String>) -> Self {
        Error::Config {
            keys: keys.join(", "),
            message: message.into(),
        }
    }

    pub(crate) fn input(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
