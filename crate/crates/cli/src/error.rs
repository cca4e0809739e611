use std::path::PathBuf;

use serde::Serialize;
use spoofcal::ErrorKind;
use thiserror::Error;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}{source}", path_prefix(.path))]
    Core {
        path: Option<PathBuf>,
        #[source]
        source: spoofcal::Error,
    },
    #[error("writing {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl From<spoofcal::Error> for CliError {
    fn from(source: spoofcal::Error) -> Self {
        CliError::Core { path: None, source }
    }
}

pub trait Context<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, spoofcal::Error> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core {
            path: Some(path.into()),
            source,
        })
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<String>,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Output { .. } => EXIT_DATA,
            CliError::Core { source, .. } => match source.kind() {
                ErrorKind::Usage => EXIT_USAGE,
                ErrorKind::Data => EXIT_DATA,
                ErrorKind::Numeric => EXIT_NUMERIC,
            },
        }
    }

    fn kind_name(&self) -> &'static str {
        match self.exit_code() {
            EXIT_USAGE => "usage",
            EXIT_NUMERIC => "numeric",
            _ => "data",
        }
    }

    /// `{"error": {"kind": ..., "message": ..., "path": ...}}`
    pub fn to_json(&self) -> String {
        let (message, path) = match self {
            CliError::Core { path, source } => (source.to_string(), path.as_ref().map(|p| p.display().to_string())),
            CliError::Output { path, source } => (source.to_string(), Some(path.display().to_string())),
            CliError::Usage(m) => (m.clone(), None),
        };
        let body = ErrorBody {
            kind: self.kind_name(),
            message,
            path,
        };
        serde_json::json!({ "error": body }).to_string()
    }
}

fn path_prefix(path: &Option<PathBuf>) -> String {
    path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default()
}
