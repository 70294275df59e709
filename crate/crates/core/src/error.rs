use std::path::PathBuf;

use chrono::NaiveDate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the pipeline.
///
/// Variants are grouped so a front-end can map them onto exit codes:
/// schema and configuration problems are usage errors, row and gap
/// problems are data errors.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: schema error: {message}", file.display())]
    Schema { file: PathBuf, message: String },

    #[error("{}:{line}: {message}", file.display())]
    Row { file: PathBuf, line: u64, message: String },

    #[error("missing weather data for {date}{}", farm_id.as_ref().map(|f| format!(" (farm {f})")).unwrap_or_default())]
    Gap { farm_id: Option<String>, date: NaiveDate },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("model format error: {0}")]
    Format(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the content of input data rather than by
    /// how the tool was invoked.
    pub fn is_data_error(&self) -> bool {
        matches!(self, Error::Row { .. } | Error::Gap { .. } | Error::InvalidInput(_))
    }
}
