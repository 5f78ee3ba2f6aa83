use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported Cartan type {series}{rank}")]
    UnsupportedType { series: char, rank: usize },

    #[error("node {node} out of range for rank {rank}")]
    NodeOutOfRange { node: usize, rank: usize },

    #[error("no braid move applies at position {position} of {word}")]
    NoBraidMove { position: usize, word: String },

    #[error("word {0} is not reduced")]
    NotReduced(String),

    #[error("word {0} is not a reduced word for the longest element")]
    NotLongestWord(String),

    #[error("module dimension exceeds the cap of {cap}")]
    DimensionCap { cap: usize },

    #[error("element is not unipotent: torus minor {minor:e} at node {node}")]
    NotUnipotent { node: usize, minor: f64 },

    #[error("off the big cell: principal minor at node {node} has magnitude {magnitude:e}")]
    OffBigCell { node: usize, magnitude: f64 },

    #[error("chart coordinate {index} vanishes (|a| = {magnitude:e})")]
    OffChart { index: usize, magnitude: f64 },

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular parameter: 1 + s e_i*(u) = {0:e}")]
    SingularParameter(f64),

    #[error("pole: the rho-minor vanishes (|minor| = {0:e})")]
    Pole(f64),

    #[error("invalid cycle: {0}")]
    InvalidCycle(String),

    #[error("quadrature aborted: {failures} nodes left the fiber, first at {first:?}")]
    QuadratureFailure { failures: usize, first: Vec<f64> },

    #[error("integration dimension {0} exceeds the guard N <= 6")]
    TooManyDimensions(usize),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
