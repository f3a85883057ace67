use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record at row {row}: {message}")]
    MalformedRow { row: usize, message: String },

    #[error("dimension mismatch: expected {expected}, found {found}{}", context_suffix(.context))]
    DimensionMismatch {
        expected: usize,
        found: usize,
        context: String,
    },

    #[error("duplicate id {0}")]
    DuplicateId(i64),

    #[error("unknown id {0}")]
    UnknownId(i64),

    #[error("zero-norm vector: {0}")]
    ZeroNorm(String),

    #[error("non-unit vector: {what} has norm {norm}")]
    NonUnitVector { what: String, norm: f64 },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("lens ids do not cover the corpus: {0}")]
    LensCoverage(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("modularity undefined: network has no edges")]
    ModularityUndefined,

    #[error("singular design: term `{term}` is collinear with preceding columns")]
    SingularDesign { term: String },

    #[error("models are not nested: {0}")]
    NotNested(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

fn context_suffix(context: &str) -> String {
    if context.is_empty() {
        String::new()
    } else {
        format!(" ({context})")
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
