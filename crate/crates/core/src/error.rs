use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in the leak-detection pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("missing feature or channel: {0}")]
    Missing(String),

    #[error("rank-deficient fit: {0}")]
    RankDeficient(String),

    #[error("fitted exponent n = {n} outside the accepted envelope [1, 3]")]
    ExponentOutOfEnvelope { n: f64 },

    #[error("no coherent source: peak correlation {peak:.4} below floor {floor}")]
    NoCoherentSource { peak: f64, floor: f64 },

    #[error("{}: {msg}", location(.path, *.line))]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// `path:line`, or just `path` when the problem is not on one line.
fn location(path: &std::path::Path, line: usize) -> String {
    match line {
        0 => path.display().to_string(),
        n => format!("{}:{n}", path.display()),
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status used by the command-line front end.
    ///
    /// Parse errors, precondition violations, missing coherent sources and
    /// I/O failures each map to their own code.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Format { .. } => 2,
            Error::InvalidLayout(_)
            | Error::InvalidInput(_)
            | Error::Missing(_)
            | Error::RankDeficient(_)
            | Error::ExponentOutOfEnvelope { .. } => 3,
            Error::NoCoherentSource { .. } => 4,
            Error::Io { .. } => 5,
        }
    }
}
