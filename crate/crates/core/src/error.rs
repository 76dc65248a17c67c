use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("electrode endpoint {endpoint} on side {side} is not a node of the level-{level} mesh")]
    Misaligned { side: usize, endpoint: f64, level: u32 },

    #[error("mesh boundary edges have not been classified against an electrode layout")]
    Unclassified,

    #[error("nonpositive conductivity {value} on element {element}")]
    NonPositiveConductivity { element: usize, value: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("parameter vector leaves [-1,1]: component {index} = {value}")]
    OutOfCube { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("index set is not a lower set: {0}")]
    NotLower(String),

    #[error("evaluation failed at {point:?}: {source}")]
    Evaluation {
        point: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite misfit")]
    NonFiniteMisfit,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config: {0}")]
    Config(String),

    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
