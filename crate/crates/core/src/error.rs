use thiserror::Error;

/// Errors raised by the netgof core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("edge probability {value} at ({i}, {j}) lies outside [0, 1]")]
    ProbabilityOutOfRange { i: usize, j: usize, value: f64 },

    #[error("true probability at ({i}, {j}) is degenerate ({value})")]
    DegenerateProbability { i: usize, j: usize, value: f64 },

    #[error("eigensolver did not converge within {iterations} iterations")]
    EigenNoConvergence { iterations: usize },

    #[error("beta-model MLE does not exist: nodes {nodes:?} have degree 0 or n-1")]
    MleNonexistence { nodes: Vec<usize> },

    #[error("beta-model fixed point did not converge: residual {residual:e} after {iterations} iterations (worst nodes {worst:?})")]
    MleNonConvergence {
        iterations: usize,
        residual: f64,
        worst: Vec<usize>,
    },

    #[error("k-means needs at least {k} distinct points, found {distinct}")]
    TooFewDistinctPoints { k: usize, distinct: usize },

    #[error("degenerate simplex: {0}")]
    DegenerateSimplex(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// The candidate cannot be fitted to this graph at all, so no test exists.
    #[error("untestable candidate {candidate}: {reason}")]
    Untestable { candidate: String, reason: String },

    #[error("fitting {candidate} failed: {source}")]
    FitFailed {
        candidate: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
