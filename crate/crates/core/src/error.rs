use thiserror::Error;

/// Errors raised by the analytic pipelines.
///
/// Every variant maps onto one of the coarse categories the command-line
/// front end reports as an exit status (see [`Error::category`]).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("unsupported representation: {0}")]
    UnsupportedRepresentation(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("insufficient statistics: {0}")]
    Statistics(String),

    #[error("numeric guard violated: {0}")]
    Numeric(String),
}

/// Coarse error class, used for exit codes and machine-readable reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Resource,
    Numeric,
}

impl ErrorCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Config => "config",
            ErrorCategory::Resource => "resource",
            ErrorCategory::Numeric => "numeric",
        }
    }
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Argument(_)
            | Error::Parse { .. }
            | Error::UnsupportedRepresentation(_)
            | Error::DimensionMismatch { .. } => ErrorCategory::Config,
            Error::Resource(_) => ErrorCategory::Resource,
            Error::Statistics(_) | Error::Numeric(_) => ErrorCategory::Numeric,
        }
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
