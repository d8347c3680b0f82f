use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed or unbuildable configuration. Exit code 2.
    #[error("config error: {0}")]
    Config(String),

    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Output { .. } => 1,
        }
    }
}

impl From<symlab_core::Error> for CliError {
    fn from(e: symlab_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}
