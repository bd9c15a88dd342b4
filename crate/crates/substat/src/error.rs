use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] substat_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub(crate) fn parse(line: u64, message: impl Into<String>) -> Self {
        Self::Parse { line, message: message.into() }
    }

    /// Process exit status: 1 usage, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        use substat_core::Error as E;
        match self {
            Self::Usage(_) | Self::Config { .. } => 1,
            Self::Io { .. } | Self::Parse { .. } => 2,
            Self::Core(e) => match e {
                E::InvalidParameter(_) | E::OutOfDomain { .. } => 1,
                E::PointOutsideWindow { .. } | E::TooFewPoints { .. } | E::EmptyInput(_) => 2,
                E::QuadratureNotConverged { .. } | E::NoUsableBandwidth => 3,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
