use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Malformed or invalid input; exit code 2.
    #[error("config error: {0}")]
    Config(String),
    /// Failure while executing a valid config; exit code 3.
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Runtime(_) | HarnessError::Io(_) => 3,
        }
    }
}
