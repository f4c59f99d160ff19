use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("row {row} sums to {sum}, which is not within {tol} of 1")]
    NotStochastic { row: usize, sum: f64, tol: f64 },

    #[error("kronecker product would have {entries} entries (cap {cap})")]
    KroneckerTooLarge { entries: usize, cap: usize },

    #[error("transition matrix has no unique stationary distribution (reducible or degenerate chain)")]
    ReducibleChain,

    #[error("power iteration did not converge after {iterations} iterations (estimate {estimate}, residual {residual:e})")]
    NotConverged {
        iterations: usize,
        estimate: f64,
        residual: f64,
    },

    #[error("symbol {symbol} is outside the alphabet of size {alphabet_size}")]
    SymbolOutOfRange { symbol: usize, alphabet_size: usize },

    #[error("sequence is empty")]
    EmptySequence,

    #[error("alphabet mismatch: {left} vs {right} symbols")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sampled differences all equal {mean_diff} with zero spread; the Z statistic is undefined")]
    DegenerateVariance { mean_diff: f64 },

    #[error("numerical inconsistency: {0}")]
    Numerical(String),

    #[error("every restart produced a transition matrix without a unique stationary distribution; try more restarts")]
    AllRestartsReducible,

    #[error("cut points coincide ({0}); too many tied values for this many bins, use fewer bins")]
    CoincidentCutPoints(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wraps an I/O failure together with the path it concerns.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
