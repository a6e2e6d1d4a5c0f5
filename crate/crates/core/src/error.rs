use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: i64 },
    #[error("all-zero adjacency matrix")]
    ZeroMatrix,
    #[error("isolated vertex {0}")]
    IsolatedVertex(String),
    #[error("duplicate label {0}")]
    DuplicateLabel(String),
    #[error("graph is disconnected: components {0:?}")]
    Disconnected(Vec<Vec<String>>),
    #[error("spectral solve did not reach tolerance {tol:e} (residual {residual:e})")]
    NoConvergence { tol: f64, residual: f64 },
    #[error("empty input: {0}")]
    Empty(String),
    #[error("degenerate square: {0}")]
    Degenerate(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("rows are not orthonormal (deviation {0:e})")]
    NotOrthonormal(f64),
    #[error("layout mismatch: {0}")]
    Layout(String),
    #[error("inconsistent constants: {0}")]
    Inconsistent(String),
    #[error("completion failed: {0}")]
    Completion(String),
    #[error("invalid fusion data: {0}")]
    Fusion(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("integer overflow in {0}")]
    Overflow(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
