use thiserror::Error;

/// Failures of configuration, placement and experiment runs.
#[derive(Debug, Error)]
pub enum ExpError {
    #[error(transparent)]
    Core(#[from] rlm_core::Error),

    #[error("placement failed: {0}")]
    Placement(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

pub type ExpResult<T> = std::result::Result<T, ExpError>;

impl ExpError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        ExpError::Io { context: context.into(), source }
    }
}
