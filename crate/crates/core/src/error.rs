use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::ConfigIssue;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {}", join_issues(.0))]
    Config(Vec<ConfigIssue>),

    #[error("{0}")]
    Invalid(String),

    #[error("unsupported bit width {0} (expected one of 2, 4, 8, 16, 32, 64)")]
    Width(u32),

    #[error("value {value} at position {index} does not fit in {width} bits")]
    ValueOverflow { index: usize, value: u64, width: u32 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("unknown column {0}")]
    UnknownColumn(String),

    #[error("unknown table {0}")]
    UnknownTable(String),

    #[error("foreign key cycle through {0}")]
    FkCycle(String),

    #[error("foreign key chain deeper than {limit} at {path}")]
    FkDepth { limit: usize, path: String },

    #[error("dangling foreign key {column} = {value}")]
    DanglingKey { column: String, value: String },

    #[error("aggregate overflow in {0}")]
    AggregateOverflow(String),

    #[error("csv row {row}, column {column}: {message}")]
    Csv { row: u64, column: String, message: String },

    #[error("store format: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    /// Stable machine-readable identifier for the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Invalid(_) => "invalid",
            Error::Width(_) => "width",
            Error::ValueOverflow { .. } => "value_overflow",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::UnknownColumn(_) => "unknown_column",
            Error::UnknownTable(_) => "unknown_table",
            Error::FkCycle(_) => "fk_cycle",
            Error::FkDepth { .. } => "fk_depth",
            Error::DanglingKey { .. } => "dangling_key",
            Error::AggregateOverflow(_) => "aggregate_overflow",
            Error::Csv { .. } => "csv",
            Error::Format(_) => "format",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }

    /// True when the error stems from bad user input rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::AggregateOverflow(_) | Error::DanglingKey { .. })
    }
}

fn join_issues(issues: &[ConfigIssue]) -> String {
    issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ")
}
