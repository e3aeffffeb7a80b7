//! Error type shared across the crate.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid {field}: {message}")]
    Invalid { field: &'static str, message: String },

    #[error("insufficient sources: need at least {needed} distinct source ids, found {found}")]
    InsufficientSources { needed: usize, found: usize },

    #[error("text has no words")]
    NoWords,

    #[error("text is empty")]
    EmptyText,

    #[error("reference list is empty")]
    EmptyReferences,

    #[error("record {record_id} has no reference bundle for source {source_id}")]
    MissingReferences {
        record_id: String,
        source_id: String,
    },

    #[error("record {record_id} is missing signal {signal}")]
    MissingSignal { record_id: String, signal: String },

    #[error("signal {signal} failed for record {record_id}: {source}")]
    Signal {
        signal: &'static str,
        record_id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("record {record_id} has no {aspect} rating")]
    MissingRating { record_id: String, aspect: String },

    #[error("missing metric scores for {} record(s): {}", .0.len(), .0.join(", "))]
    MissingScores(Vec<String>),

    #[error("provider transport failure: {0}")]
    ProviderTransport(String),

    #[error("provider fault: {0}")]
    ProviderFault(String),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("no comparable pairs after filtering")]
    NoComparablePairs,

    #[error("unknown head: {0}")]
    UnknownHead(String),

    #[error("model state: {0}")]
    ModelState(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn malformed(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::MalformedLine {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            message: message.into(),
        }
    }

    /// Stable one-word category for machine-parsable CLI error lines.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::MalformedLine { .. }
            | Error::Invalid { .. }
            | Error::InsufficientSources { .. }
            | Error::NoWords
            | Error::EmptyText
            | Error::EmptyReferences => "data",
            Error::MissingReferences { .. }
            | Error::MissingSignal { .. }
            | Error::Signal { .. }
            | Error::MissingRating { .. }
            | Error::MissingScores(_) => "data",
            Error::ProviderTransport(_) | Error::ProviderFault(_) => "provider",
            Error::UndefinedCorrelation(_) | Error::NoComparablePairs => "eval",
            Error::UnknownHead(_) | Error::ModelState(_) => "model",
            Error::Config(_) => "config",
        }
    }
}
