use std::path::PathBuf;

use thiserror::Error;

/// Broad failure class, used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad arguments, unreadable or malformed inputs.
    Usage,
    /// Inputs parsed but left nothing to analyse.
    EmptyData,
    /// A numeric routine could not produce a result.
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {message}")]
    Parse { context: String, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no usable data: {0}")]
    Empty(String),
    #[error("lexicon `{0}` has no word in the model vocabulary")]
    LexiconNotFound(String),
    #[error("zero-norm vector: {0}")]
    ZeroNorm(String),
    #[error("zero variance in {0}")]
    ZeroVariance(String),
    #[error("insufficient data: {0}")]
    Insufficient(String),
    #[error("degenerate design: {0}")]
    Degenerate(String),
    #[error("genres with no songs in bucket {bucket_start}: {genres}")]
    MissingGenres { bucket_start: i32, genres: String },
    #[error("run {run} failed: {source}")]
    Run {
        run: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(context: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } | Error::Parse { .. } | Error::Config(_) => ErrorKind::Usage,
            Error::Empty(_)
            | Error::LexiconNotFound(_)
            | Error::Insufficient(_)
            | Error::MissingGenres { .. } => ErrorKind::EmptyData,
            Error::ZeroNorm(_) | Error::ZeroVariance(_) | Error::Degenerate(_) => {
                ErrorKind::Numeric
            }
            Error::Run { source, .. } => source.kind(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
