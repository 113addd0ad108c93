use thiserror::Error;

/// Errors produced by spline spaces, rule derivation, assembly and studies.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),
    #[error("basis index {index} out of range for space of dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("evaluation point {x} outside the parameter domain [0, 1]")]
    PointOutOfDomain { x: f64 },
    #[error("operation requires a uniform knot vector")]
    NonUniformSpace,
    #[error("weighted rules are only derived for degrees 2 and 3, got {0}")]
    UnsupportedDegree(usize),
    #[error("no rule available for degree {degree} kind {kind}")]
    MissingRule { degree: usize, kind: String },
    #[error("nonlinear solver exhausted all starts; best residual {best_residual:.3e} after {starts} starts")]
    SolverExhausted { best_residual: f64, starts: usize },
    #[error("quartic has no admissible node in (0, 1) for weight {omega1}; requires omega1 >= 8/15")]
    NoAdmissibleNode { omega1: f64 },
    #[error("degenerate node placement for weight index {index}: {reason}")]
    DegenerateNodes { index: usize, reason: String },
    #[error("matrix is not positive definite ({0})")]
    NotPositiveDefinite(String),
    #[error("problem dimension {n} exceeds the dense-solver cap {cap}")]
    DimensionCap { n: usize, cap: usize },
    #[error("evaluation counters are empty for strategy {0}")]
    EmptyCounter(String),
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
