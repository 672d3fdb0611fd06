use thiserror::Error;

/// Errors raised by the library layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("grid functions live on different grids")]
    GridMismatch,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("left derivative of the generator is undefined at 0")]
    UndefinedLeftDerivative,

    #[error("non-finite objective at node {node} (x = {x})")]
    NonFinite { node: usize, x: f64 },

    #[error("basis is numerically dependent (singular value ratio {ratio:e})")]
    DependentBasis { ratio: f64 },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("{path}: {source}")]
    File {
        path: std::path::PathBuf,
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn open_csv(path: &std::path::Path) -> Result<csv::Reader<std::fs::File>> {
    csv::Reader::from_path(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
