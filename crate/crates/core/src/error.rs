use thiserror::Error;

/// Errors raised by the spectral toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("kernel error: {0}")]
    Kernel(String),
    #[error("grid too coarse: {0}")]
    Aliasing(String),
    #[error("divergence at step {step} (t = {time}): {what}")]
    Divergence { step: usize, time: f64, what: String },
    #[error("iteration cap exceeded: requested order {requested}, cap {cap}")]
    IterationCap { requested: usize, cap: usize },
    #[error("parse error at byte {offset}: {msg}")]
    Parse { offset: usize, msg: String },
    #[error("incompatible snapshot version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
