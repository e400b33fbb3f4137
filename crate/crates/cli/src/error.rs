use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("serialization failed: {0}")]
    Serialization(String),
    #[error("class number cache integrity check failed: {0}")]
    CacheIntegrity(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Serialization(_) => 3,
            CliError::CacheIntegrity(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<tcm_core::Error> for CliError {
    fn from(e: tcm_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}
