use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: invalid parameter: {reason}")]
    InvalidParameter { op: &'static str, reason: String },

    #[error("{op}: outside domain: {reason}")]
    Domain { op: &'static str, reason: String },

    #[error("{op}: no convergence after {iterations} iterations")]
    NoConvergence { op: &'static str, iterations: usize },

    #[error("{op}: unsupported: {reason}")]
    Unsupported { op: &'static str, reason: String },

    #[error("season {season}: {source}")]
    Season {
        season: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(op: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { op, reason: reason.into() }
    }

    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain { op, reason: reason.into() }
    }

    /// Name of the operation that failed, for structured CLI and FFI reporting.
    pub fn operation(&self) -> &str {
        match self {
            Error::InvalidParameter { op, .. }
            | Error::Domain { op, .. }
            | Error::NoConvergence { op, .. }
            | Error::Unsupported { op, .. } => op,
            Error::Season { source, .. } => source.operation(),
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
