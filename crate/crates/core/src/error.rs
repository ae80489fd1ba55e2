use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{kind} not found: {id}")]
    NotFound { kind: &'static str, id: String },

    #[error("class {0} has no registered students")]
    DegenerateClass(String),

    #[error("student {0} has no registered classes")]
    DegenerateStudent(String),

    #[error("student {student} is not registered in {target}")]
    NotRegistered { student: String, target: String },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("value {value} outside [{lo}, {hi}]")]
    Range { value: f64, lo: f64, hi: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("silhouette undefined: {0}")]
    UndefinedScore(String),

    #[error("no valid clustering: all {0} grid cells were rejected")]
    NoValidClustering(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("integrity error in {file} line {line}: {message}")]
    Integrity {
        file: String,
        line: u64,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {file}: {source}")]
    Csv {
        file: String,
        #[source]
        source: csv::Error,
    },

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn integrity(file: &str, line: u64, message: impl Into<String>) -> Self {
        Error::Integrity {
            file: file.to_string(),
            line,
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            Error::Csv { source, .. } if source.is_io_error() => 3,
            Error::Integrity { .. } | Error::Csv { .. } => 4,
            Error::InsufficientSamples { .. } => 5,
            Error::NoValidClustering(_) => 6,
            Error::Config(_) => 7,
            _ => 1,
        }
    }
}
