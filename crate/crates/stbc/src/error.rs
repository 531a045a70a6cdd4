use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] stbc_core::Error),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("missing results: {0}")]
    MissingResults(String),
    #[error("malformed record: {0}")]
    Record(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable identifier used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Core(e) => match e {
                stbc_core::Error::BudgetExceeded { .. } => "BudgetExceeded",
                stbc_core::Error::NotFastDecodable => "NotFastDecodable",
                stbc_core::Error::UnknownCode(_) => "UnknownCode",
                stbc_core::Error::UnsupportedConstellation(_) => "UnsupportedConstellation",
                _ => "CoreError",
            },
            Error::ConfigInvalid(_) => "ConfigInvalid",
            Error::MissingResults(_) => "MissingResults",
            Error::Record(_) => "MalformedRecord",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
