use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty sample")]
    EmptySample,

    #[error("non-finite value in sample")]
    NonFinite,

    #[error("fewer than 2 groups (found {0})")]
    TooFewGroups(usize),

    /// Every offending group together with its subject count.
    #[error("groups with fewer than 2 subjects: {}", format_groups(.0))]
    GroupTooSmall(Vec<(String, usize)>),

    #[error("all variances are zero, the covariance matrix vanishes")]
    ZeroVariance,

    #[error("zero denominator for pair ({0}, {1}): both group mean variances are 0")]
    ZeroDenominator(String, String),

    #[error("reference distribution built for k = {expected} but {found} groups were supplied")]
    GroupCountMismatch { expected: usize, found: usize },

    #[error("{}", .0.join("\n"))]
    Validation(Vec<String>),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{context}: {source}")]
    Internal {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn context(self, context: impl Into<String>) -> Self {
        Error::Internal {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// True for failures caused by the file system rather than by the data.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Csv(e) => e.is_io_error(),
            Error::Internal { source, .. } => source.is_io(),
            _ => false,
        }
    }
}

fn format_groups(groups: &[(String, usize)]) -> String {
    groups
        .iter()
        .map(|(g, n)| format!("{g} (n = {n})"))
        .collect::<Vec<_>>()
        .join(", ")
}
