use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

/// Everything the CLI can fail with. Each variant names the flag (or
/// environment variable) it blames.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{flag}: {constraint}")]
    Invalid { flag: String, constraint: String },

    #[error("{flag}: {source}")]
    Core {
        flag: String,
        #[source]
        source: selbound_core::Error,
    },

    #[error("{flag}: {}: {source}", path.display())]
    Io {
        flag: String,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: &'static str,
    flag: &'a str,
    constraint: String,
}

impl CliError {
    pub fn invalid(flag: &str, constraint: impl Into<String>) -> Self {
        CliError::Invalid {
            flag: flag.to_string(),
            constraint: constraint.into(),
        }
    }

    pub fn core(flag: &str, source: selbound_core::Error) -> Self {
        CliError::Core {
            flag: flag.to_string(),
            source,
        }
    }

    pub fn io(flag: &str, path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            flag: flag.to_string(),
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, CliError::Core { source, .. } if !source.is_validation())
    }

    /// 1 for bad input, 2 for internal numeric failure.
    pub fn exit_code(&self) -> i32 {
        if self.is_numeric() {
            2
        } else {
            1
        }
    }

    pub fn flag(&self) -> &str {
        match self {
            CliError::Invalid { flag, .. }
            | CliError::Core { flag, .. }
            | CliError::Io { flag, .. } => flag,
        }
    }

    /// Single-line JSON for stderr.
    pub fn to_json_line(&self) -> String {
        let constraint = match self {
            CliError::Invalid { constraint, .. } => constraint.clone(),
            CliError::Core { source, .. } => source.to_string(),
            CliError::Io { path, source, .. } => format!("{}: {source}", path.display()),
        };
        let line = ErrorLine {
            error: if self.is_numeric() {
                "numeric"
            } else {
                "validation"
            },
            flag: self.flag(),
            constraint: constraint.replace('\n', " "),
        };
        serde_json::to_string(&line).expect("error line serializes")
    }
}

/// Attaches a flag name to core results.
pub trait BlameFlag<T> {
    fn blame(self, flag: &str) -> Result<T, CliError>;
}

impl<T> BlameFlag<T> for selbound_core::Result<T> {
    fn blame(self, flag: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::core(flag, e))
    }
}
