//! Process-level error split: validation failures exit 1, I/O failures
//! exit 2 and always name the offending path.

use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    /// Validation error prefixed with the file it came from.
    pub fn in_file(path: impl AsRef<Path>, msg: impl std::fmt::Display) -> Self {
        CliError::Validation(format!("{}: {msg}", path.as_ref().display()))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 2,
            CliError::Validation(_) => 1,
        }
    }
}

impl From<iconforge_core::Error> for CliError {
    fn from(e: iconforge_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
