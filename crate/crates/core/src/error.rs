use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure classes shared by every pipeline.
///
/// The CLI maps each class onto a stable exit code (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates its type invariant (e.g. `H` outside `(0, 1)`).
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A well-formed request that falls outside the model's domain, such as an
    /// infeasible dyadic level.
    #[error("domain error: {0}")]
    Domain(String),

    /// The request exceeds a documented capability envelope.
    #[error("capability error: {0}")]
    Capability(String),

    /// Estimation on degenerate or insufficient data.
    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("{path}: line {line}: {reason}")]
    Parse {
        path: PathBuf,
        line: u64,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Format(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Short machine-readable class name.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::Domain(_) => "domain",
            Error::Capability(_) => "capability",
            Error::Estimation(_) => "estimation",
            Error::Numerical(_) => "numerical",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::Format(_) => "format",
        }
    }

    /// Process exit code: 2 usage, 3 domain/feasibility, 4 numerical, 5 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. } => 2,
            Error::Domain(_) | Error::Capability(_) | Error::Estimation(_) => 3,
            Error::Numerical(_) => 4,
            Error::Parse { .. } | Error::Io { .. } | Error::Format(_) => 5,
        }
    }
}
