use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("symbol table mismatch: {0}")]
    SymbolMismatch(String),

    #[error("no accepting path")]
    EmptyResult,

    #[error("machine is cyclic")]
    Cyclic,

    #[error("invalid machine: {0}")]
    InvalidFst(String),

    #[error("arc tag conflict: both operands tag the composed arc ({left} vs {right})")]
    TagConflict { left: u32, right: u32 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("training aborted: {0}")]
    TrainingAborted(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
