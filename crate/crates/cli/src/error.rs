use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config field `{field}`: {reason}")]
    ConfigInvalid { field: String, reason: String },

    #[error("missing result file {}", .0.display())]
    MissingResult(PathBuf),

    #[error("{context}: {source}")]
    Experiment {
        context: String,
        #[source]
        source: junction_core::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::ConfigInvalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    pub fn csv(path: impl Into<PathBuf>) -> impl FnOnce(csv::Error) -> Self {
        let path = path.into();
        move |source| CliError::Csv { path, source }
    }

    /// Core errors with a config field become field-level diagnostics under
    /// `prefix`; everything else keeps the experiment context.
    pub fn from_core<'a>(prefix: &'a str, context: &'a str) -> impl FnOnce(junction_core::Error) -> Self + 'a {
        move |source| match source {
            junction_core::Error::InvalidScenario { field, reason } => CliError::ConfigInvalid {
                field: format!("{prefix}.{field}"),
                reason,
            },
            source => CliError::Experiment {
                context: context.to_string(),
                source,
            },
        }
    }
}
