use thiserror::Error;

/// Errors raised across the exploration toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input arity mismatch: expected {expected} input words, got {got}")]
    InputArity { expected: usize, got: usize },

    #[error("composition error: {0}")]
    Composition(String),

    #[error("circuit parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid component spec: {0}")]
    Spec(String),

    #[error("invalid library config: {0}")]
    LibraryConfig(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("missing cached entry for component {0}")]
    CacheMiss(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("dataset not registered: {0}")]
    DatasetMissing(String),

    #[error("pipeline A has no surrogate; query the oracle directly")]
    NotASurrogate,

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("schema mismatch: model expects {expected}, features are {got}")]
    SchemaMismatch { expected: String, got: String },

    #[error("objective arity mismatch: {0} vs {1}")]
    ObjectiveArity(usize, usize),

    #[error("invalid hypervolume reference point: {0}")]
    InvalidReference(String),

    #[error("index out of bounds: {0}")]
    Bounds(String),

    #[error("model format error: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
