use std::path::{Path, PathBuf};

use serde_json::json;
use trimeasure::ErrorKind;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{message}")]
    Config { message: String, path: Option<PathBuf> },

    #[error("output directory {} is locked by another run (remove the lock file if stale)", .0.display())]
    Locked(PathBuf),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] trimeasure::Error),
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config {
            message: message.into(),
            path: None,
        }
    }

    pub fn missing_file(what: &str, path: &Path) -> Self {
        CliError::Config {
            message: format!("{what} not found: {}", path.display()),
            path: Some(path.to_path_buf()),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } | CliError::Locked(_) => "config",
            CliError::Io { .. } => "data",
            CliError::Core(e) => match e.kind() {
                ErrorKind::Config => "config",
                ErrorKind::Data => "data",
                ErrorKind::Numeric => "numeric",
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "config" => 2,
            "data" => 3,
            _ => 4,
        }
    }

    /// Single-line machine-readable form for stderr.
    pub fn to_json(&self) -> String {
        let path = match self {
            CliError::Config { path, .. } => path.clone(),
            CliError::Locked(p) => Some(p.clone()),
            CliError::Io { path, .. } => Some(path.clone()),
            CliError::Core(_) => None,
        };
        json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.to_string(),
                "path": path.map(|p| p.display().to_string()),
            }
        })
        .to_string()
    }
}
