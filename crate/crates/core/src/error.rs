use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: missing column `{column}`")]
    MissingColumn { context: String, column: String },

    #[error("{context}, line {line}: {message}")]
    Parse {
        context: String,
        line: u64,
        message: String,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid index spec: {0}")]
    InvalidSpec(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no panel for variable `{0}`")]
    MissingPanel(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("nothing to impute from: every entry is missing")]
    NothingToImpute,

    #[error("mortality panel has no observed rates")]
    EmptyMortality,

    #[error("unknown region `{0}`")]
    UnknownRegion(String),

    #[error("unknown time key `{0}`")]
    UnknownTime(String),

    #[error("self-check failed: {0}")]
    SelfCheck(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            line,
            message: message.into(),
        }
    }

    /// Process exit code for the command-line front end: 3 for internal
    /// self-check failures, 2 for everything caused by inputs or config.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SelfCheck(_) => 3,
            _ => 2,
        }
    }
}
