use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::annotate::AnnotateError;
use crate::baseline::BaselineError;
use crate::checklist::ChecklistError;
use crate::metrics::MetricsError;
use crate::prompting::PromptError;
use crate::sampling::SamplingError;

/// Crate-level error. Every variant knows the module it came from and a short
/// kind name, which the CLI prints as a machine-parsable line.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Prompting(#[from] PromptError),
    #[error(transparent)]
    Annotate(#[from] AnnotateError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Checklist(#[from] ChecklistError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        Error::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn format(path: impl AsRef<Path>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.as_ref().to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub fn module(&self) -> &'static str {
        match self {
            Error::Sampling(_) => "sampling",
            Error::Prompting(_) => "prompting",
            Error::Annotate(_) => "annotate",
            Error::Metrics(_) => "metrics",
            Error::Checklist(_) => "checklist",
            Error::Baseline(_) => "baseline",
            Error::Io { .. } | Error::Format { .. } => "io",
            Error::Config(_) => "cli",
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Sampling(e) => e.kind(),
            Error::Prompting(e) => e.kind(),
            Error::Annotate(e) => e.kind(),
            Error::Metrics(e) => e.kind(),
            Error::Checklist(e) => e.kind(),
            Error::Baseline(e) => e.kind(),
            Error::Io { .. } => "Io",
            Error::Format { .. } => "Format",
            Error::Config(_) => "Config",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
