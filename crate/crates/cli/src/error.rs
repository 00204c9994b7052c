use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] yrast::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// 2 for configurations that can never succeed, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        use yrast::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(
                E::InvalidParameter { .. }
                | E::OutOfRange { .. }
                | E::EmptyBasis { .. }
                | E::DimensionMismatch { .. }
                | E::BasisMismatch,
            ) => 2,
            _ => 1,
        }
    }

    pub fn diagnostic(&self) -> serde_json::Value {
        let detail = match self {
            CliError::Core(e) => serde_json::to_value(e).unwrap_or(serde_json::Value::Null),
            CliError::Usage(_) => json!({ "kind": "Usage" }),
            CliError::Io { path, .. } => json!({ "kind": "Io", "path": path }),
            CliError::Csv(_) => json!({ "kind": "Csv" }),
            CliError::Json(_) => json!({ "kind": "Json" }),
        };
        json!({
            "status": "error",
            "exit_code": self.exit_code(),
            "message": self.to_string(),
            "error": detail,
        })
    }
}
