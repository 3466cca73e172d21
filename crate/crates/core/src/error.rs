use std::path::PathBuf;

/// Errors raised by the simulator and the schedulers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid scenario config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("insufficient training data: {points} points for {clusters} clusters")]
    InsufficientTrainingData { points: usize, clusters: usize },

    #[error("search space too large: {leaves} leaves exceeds cap {cap}")]
    TooLarge { leaves: u128, cap: u128 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
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
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
