use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported or corrupt image {}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    #[error("dataset: {0}")]
    Dataset(String),

    #[error("sampling: {0}")]
    Sampling(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("training: {0}")]
    Training(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("aggregation: {0}")]
    Aggregation(String),

    #[error("normalization: {0}")]
    Normalization(String),

    #[error("export: {0}")]
    Export(String),

    #[error("evaluation: {0}")]
    Evaluation(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with a caller-supplied context string, e.g. the image
    /// path or run index being processed.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Stable short identifier for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
            Error::Dataset(_) => "dataset",
            Error::Sampling(_) => "sampling",
            Error::Config(_) => "config",
            Error::Training(_) => "training",
            Error::Contract(_) => "contract",
            Error::Aggregation(_) => "aggregation",
            Error::Normalization(_) => "normalization",
            Error::Export(_) => "export",
            Error::Evaluation(_) => "evaluation",
            Error::Context { source, .. } => source.kind(),
        }
    }
}
