use alloc::boxed::Box;
use alloc::string::String;

/// Errors produced by the core pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("training error: {0}")]
    Training(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("problem too large: n = {n} exceeds limit {limit}")]
    Size { n: usize, limit: usize },
    #[error("config error: {0}")]
    Config(String),
    #[error("optics error: {0}")]
    Optics(String),
    #[error("ingestion error: {0}")]
    Ingestion(String),
    #[error("analysis error: {0}")]
    Analysis(String),
    #[error("cycle {cycle}: {source}")]
    Cycle { cycle: usize, source: Box<Error> },
}

pub type Result<T> = core::result::Result<T, Error>;
