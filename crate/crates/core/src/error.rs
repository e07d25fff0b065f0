use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the decomposition library.
///
/// Every variant maps to a short machine-readable code (see [`Error::code`])
/// that the command-line front end prints on failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mode {mode} out of range for order-{order} tensor")]
    InvalidMode { mode: usize, order: usize },

    #[error("{0}")]
    Shape(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("{0}")]
    InvalidRank(String),

    #[error("{0}")]
    InvalidInput(String),

    #[error("{0}")]
    RankDeficient(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("mode {mode}: {source}")]
    InMode { mode: usize, source: Box<Error> },

    #[error("{0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidMode { .. } => "invalid-mode",
            Error::Shape(_) => "shape",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::InvalidRank(_) => "invalid-rank",
            Error::InvalidInput(_) => "invalid-input",
            Error::RankDeficient(_) => "rank-deficient",
            Error::Unsupported(_) => "unsupported",
            Error::InMode { source, .. } => source.code(),
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        }
    }

    /// Usage and validation failures, as opposed to numerical or I/O failures.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::InvalidMode { .. }
            | Error::Shape(_)
            | Error::InvalidArgument(_)
            | Error::InvalidRank(_)
            | Error::InvalidInput(_)
            | Error::Unsupported(_) => true,
            Error::InMode { source, .. } => source.is_validation(),
            Error::RankDeficient(_) | Error::Format(_) | Error::Io(_) => false,
        }
    }

    pub(crate) fn in_mode(self, mode: usize) -> Error {
        Error::InMode {
            mode,
            source: Box::new(self),
        }
    }
}

pub(crate) fn shape_err(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}
