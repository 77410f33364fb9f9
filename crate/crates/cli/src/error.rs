//! CLI error type with machine-readable rendering.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] mmcsp_core::Error),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("parse error in {path} line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("shape mismatch in {path}: expected {expected} columns, found {found}")]
    ShapeMismatch {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("manifest error in {path}: {message}")]
    Manifest { path: PathBuf, message: String },

    #[error("invalid arguments: {0}")]
    Args(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable tag for scripting against stderr output.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(_) => "solver",
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::ShapeMismatch { .. } => "shape-mismatch",
            CliError::Manifest { .. } => "manifest",
            CliError::Args(_) => "args",
        }
    }

    /// Machine-readable error object for stderr.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "error": self.to_string(),
            "kind": self.kind(),
        })
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
