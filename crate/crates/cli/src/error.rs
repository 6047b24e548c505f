use std::path::PathBuf;

use thiserror::Error;

use renewal_coupling::Error as ModelError;

/// Failures of a CLI run, each tied to a distinct exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{key}: {message}")]
    Config { key: String, message: String },

    #[error("{key}: {message}")]
    Envelope { key: String, message: String },

    #[error("{key}: {message}")]
    DivergentBound { key: String, message: String },

    #[error("bounds.censor_threshold: censoring rate {rate} exceeds {threshold}")]
    Censoring { rate: f64, threshold: f64 },
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Sorts a library error into the exit-status classes.
    pub fn model(key: impl Into<String>, source: ModelError) -> Self {
        let key = key.into();
        let message = source.to_string();
        match source {
            ModelError::EnvelopeViolation { .. } | ModelError::StateEnvelopeViolation { .. } => CliError::Envelope { key, message },
            ModelError::InfiniteMoment { .. } | ModelError::NoCertifiedCoupling { .. } => CliError::DivergentBound { key, message },
            _ => CliError::Config { key, message },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config { .. } => 2,
            CliError::Envelope { .. } => 3,
            CliError::DivergentBound { .. } => 4,
            CliError::Censoring { .. } => 5,
        }
    }
}

/// Attaches a config key to library results.
pub(crate) trait Keyed<T> {
    fn key(self, key: &str) -> Result<T, CliError>;
}

impl<T> Keyed<T> for Result<T, ModelError> {
    fn key(self, key: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::model(key, e))
    }
}
