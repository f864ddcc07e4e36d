use thiserror::Error;

/// Errors raised by sketch construction, estimation and the analysis harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("negative weight {weight} at index {index}")]
    NegativeWeight { index: u64, weight: f64 },

    #[error("non-finite weight at index {index}")]
    NonFiniteWeight { index: u64 },

    #[error("duplicate item index {index}")]
    DuplicateIndex { index: u64 },

    #[error("population is empty")]
    EmptyPopulation,

    #[error("degenerate population: total weight is zero")]
    DegeneratePopulation,

    #[error("invalid sample size k = {k}: must be at least {min}")]
    InvalidK { k: usize, min: usize },

    #[error("invalid threshold {tau}: must be positive and finite")]
    InvalidThreshold { tau: f64 },

    #[error("bound undefined for k = {k}: requires k >= 2")]
    BoundUndefined { k: usize },

    #[error("tau_i undefined: {others} other items cannot supply a k-th smallest rank for k = {k}")]
    TauUndefined { others: usize, k: usize },

    #[error("order statistic undefined: need k + 1 <= n, got n = {n}, k = {k}")]
    OrderStatisticUndefined { n: usize, k: usize },

    #[error("item index {index} not present")]
    UnknownIndex { index: u64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid sketch: {0}")]
    InvalidSketch(String),

    #[error("cannot merge sketches: {0}")]
    Merge(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
