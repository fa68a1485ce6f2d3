use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("empty core: the graph has no bounded edges")]
    EmptyCore,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("coefficient bounds violated: {0}")]
    Hypothesis(String),

    #[error("integrator step size underflow at x = {x}")]
    StepUnderflow { x: f64 },

    #[error("integrator exceeded {0} steps")]
    TooManySteps(usize),

    #[error("no admissible solution: {0}")]
    NoSolution(String),

    #[error("bracketing failed: {0}")]
    Bracket(String),

    #[error("operation requires a compact graph (no half-lines)")]
    NonCompact,

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("Morse index indeterminate at this resolution: eigenvalue {eigenvalue:e} within ±{tol:e} of zero")]
    Indeterminate { eigenvalue: f64, tol: f64 },

    #[error("truncation too small: {0}")]
    Truncation(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("barrier construction failed: {0}")]
    Barrier(String),

    #[error("continuation failed: no grid point converged")]
    ContinuationFailed,

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
