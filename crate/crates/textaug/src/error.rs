//! Error type shared by the IO layer, the runner and the CLI.

use std::path::{Path, PathBuf};

use textaug_core::augment::AugmentError;
use textaug_core::corpus::CorpusError;
use textaug_core::grid::GridError;
use textaug_core::lexicon::LexiconError;
use textaug_core::stats::StatsError;
use textaug_core::summary::SummaryError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("provider: {0}")]
    Provider(String),
    #[error("usage: {0}")]
    Usage(String),
}

/// Broad failure classes, each with its own process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Io,
    Format,
    Config,
    Data,
    Provider,
    Usage,
}

impl Category {
    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Io => "io",
            Category::Format => "format",
            Category::Config => "config",
            Category::Data => "data",
            Category::Provider => "provider",
            Category::Usage => "usage",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Category::Usage => 2,
            Category::Io => 3,
            Category::Format => 4,
            Category::Config => 5,
            Category::Data => 6,
            Category::Provider => 7,
        }
    }
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn format(path: &Path, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }

    pub fn category(&self) -> Category {
        match self {
            Error::Io { .. } => Category::Io,
            Error::Format { .. } => Category::Format,
            Error::Config(_) => Category::Config,
            Error::Data(_) => Category::Data,
            Error::Provider(_) => Category::Provider,
            Error::Usage(_) => Category::Usage,
        }
    }
}

impl From<CorpusError> for Error {
    fn from(e: CorpusError) -> Self {
        Error::Data(e.to_string())
    }
}

impl From<GridError> for Error {
    fn from(e: GridError) -> Self {
        Error::Config(e.to_string())
    }
}

impl From<StatsError> for Error {
    fn from(e: StatsError) -> Self {
        Error::Data(e.to_string())
    }
}

impl From<SummaryError> for Error {
    fn from(e: SummaryError) -> Self {
        Error::Data(e.to_string())
    }
}

impl From<AugmentError> for Error {
    fn from(e: AugmentError) -> Self {
        match e {
            AugmentError::Provider(_) | AugmentError::Translation(_) => Error::Provider(e.to_string()),
            other => Error::Data(other.to_string()),
        }
    }
}

impl From<LexiconError> for Error {
    fn from(e: LexiconError) -> Self {
        Error::Data(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
