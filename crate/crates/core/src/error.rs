use std::path::PathBuf;

/// Errors produced by the simulator, the session engine and the analysis routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("{path}:{line}: parse error: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: {message}")]
    Validation {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("illegal event {event} in stage {stage}")]
    IllegalEvent { stage: String, event: String },

    #[error("non-identifiable fit: {0}")]
    NonIdentifiable(String),

    #[error("JND undefined: {0}")]
    UndefinedJnd(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("missing cell at subject {subject}, condition {condition}")]
    MissingCell { subject: usize, condition: usize },

    #[error("unsupported studentized range arguments: {0}")]
    UnsupportedDf(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
