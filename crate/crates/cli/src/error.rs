use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{path}: {source}")]
    Input { path: String, source: simgroup::Error },
    #[error("`{0}` is neither a file nor a built-in name")]
    NotFound(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] simgroup::Error),
}

impl CliError {
    pub fn input(path: &str, source: simgroup::Error) -> Self {
        CliError::Input { path: path.to_string(), source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
