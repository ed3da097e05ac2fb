use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure in {step}: {source}")]
    Numerical {
        step: String,
        #[source]
        source: spectral_mesh::Error,
    },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Numerical { .. } | CliError::Verification(_) => 1,
        }
    }
}

pub fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Tags a core error with the step that produced it.
pub trait Step<T> {
    fn step(self, step: &str) -> Result<T, CliError>;
}

impl<T> Step<T> for spectral_mesh::Result<T> {
    fn step(self, step: &str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numerical {
            step: step.to_string(),
            source,
        })
    }
}
