use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] lion_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("not a checkpoint: bad magic bytes")]
    BadMagic,
    #[error("unsupported {what} format_version {found} (this build reads {supported})")]
    UnsupportedVersion { what: &'static str, found: u64, supported: u64 },
    #[error("checkpoint truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("checkpoint header: {0}")]
    Header(String),
    #[error("checkpoint holds a {found} artifact, expected {expected}")]
    KindMismatch { expected: String, found: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {field} has dimension {found}, header declares {expected}")]
    DatasetDimension {
        line: usize,
        field: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown environment '{name}' (available: {})", available.join(", "))]
    UnknownEnv { name: String, available: Vec<String> },
    #[error("invalid config: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
