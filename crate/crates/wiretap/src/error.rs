use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] wiretap_core::Error),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl HarnessError {
    /// Process exit code: 3 for bad input, 2 for everything that failed while running.
    pub fn exit_code(&self) -> i32 {
        use wiretap_core::Error as E;
        match self {
            HarnessError::Core(E::InvalidInput(_)) => 3,
            HarnessError::Core(_) => 2,
            HarnessError::Read { .. } | HarnessError::Json { .. } | HarnessError::Csv { .. } => 3,
            HarnessError::InvalidConfig(_) => 3,
            HarnessError::Write { .. } => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
