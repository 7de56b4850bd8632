use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: I/O error: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed input at byte {offset}: {message}")]
    Parse {
        path: PathBuf,
        offset: u64,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown group `{0}`")]
    UnknownGroup(String),

    #[error("group `{0}` has a single answer class; normalized entropy is undefined")]
    SingleClass(String),

    #[error("benchmark is empty: {0}")]
    EmptyBenchmark(String),

    #[error("data error: {0}")]
    Data(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by how the tool was invoked rather than by
    /// the data it was given.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}
