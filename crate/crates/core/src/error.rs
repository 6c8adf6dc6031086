use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("transition row (s={state}, a={action}) {reason}")]
    InvalidTransition {
        state: usize,
        action: usize,
        reason: String,
    },
    #[error("reward mean for (s={state}, a={action}) {reason}")]
    InvalidReward {
        state: usize,
        action: usize,
        reason: String,
    },
    #[error("optimal value V*_{step}({state}) = {value} outside [0, {horizon}]")]
    ValueOutOfRange {
        step: usize,
        state: usize,
        value: f64,
        horizon: usize,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("sample {sample} exceeds the bound C = {bound}")]
    BoundViolated { sample: f64, bound: f64 },
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }
}
