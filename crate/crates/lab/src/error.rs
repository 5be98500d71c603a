use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Simulation(#[from] kljn_core::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot parse config file {path}: {source}")]
    ConfigFile {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("malformed CSV field `{field}`: {value:?}")]
    CsvField { field: &'static str, value: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for bad input, 3 for output failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Simulation(_)
            | LabError::Config(_)
            | LabError::ConfigFile { .. }
            | LabError::CsvField { .. } => 2,
            LabError::Io { .. } | LabError::Csv(_) | LabError::Json(_) => 3,
        }
    }
}
