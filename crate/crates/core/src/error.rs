use thiserror::Error;

pub type Result<T, E = DloError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DloError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("node count mismatch: expected {expected}, found {found}")]
    NodeCountMismatch { expected: usize, found: usize },

    #[error("step count mismatch: expected {expected}, found {found}")]
    StepCountMismatch { expected: usize, found: usize },

    #[error("degenerate geometry: segment {segment} has zero length")]
    DegenerateSegment { segment: usize },

    /// A boundary shape has a segment longer than the inextensible limit, so
    /// no trajectory can satisfy the length constraints. Indices are 1-based.
    #[error(
        "infeasible boundary: {shape} segment {segment} (nodes {segment}-{next}) has length {length:.9} > limit {limit:.9}",
        next = segment + 1
    )]
    InfeasibleBoundary {
        shape: &'static str,
        segment: usize,
        length: f64,
        limit: f64,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown planner {0:?}")]
    UnknownPlanner(String),
}

impl From<serde_json::Error> for DloError {
    fn from(e: serde_json::Error) -> Self {
        DloError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
