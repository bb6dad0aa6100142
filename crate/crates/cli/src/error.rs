use gram_moments::ErrorClass;
use serde_json::json;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] gram_moments::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 2 validation, 3 numerical conditioning, 4 convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.class() {
                ErrorClass::Validation => 2,
                ErrorClass::Conditioning => 3,
                ErrorClass::Convergence => 4,
            },
            CliError::Io { .. } | CliError::Input(_) => 2,
        }
    }

    pub fn to_json(&self) -> String {
        let kind = match self {
            CliError::Core(e) => e.kind(),
            CliError::Io { .. } => "io_error",
            CliError::Input(_) => "input_error",
        };
        json!({
            "error": {
                "kind": kind,
                "exit_code": self.exit_code(),
                "message": self.to_string(),
            }
        })
        .to_string()
    }
}
