use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {point} is outside the kernel domain ({domain})")]
    DomainMismatch { point: String, domain: String },

    #[error("point set is empty")]
    EmptyPointSet,

    #[error("duplicate point label {0}")]
    DuplicatePoint(String),

    #[error("real labels must be strictly increasing (at index {0})")]
    NotIncreasing(usize),

    #[error("target {0} is not in the point set")]
    TargetNotFound(String),

    #[error("Gram matrix is not strictly positive definite")]
    SingularGram,

    #[error("Gram matrix is not positive semidefinite (witness index {0})")]
    NotPsd(usize),

    #[error("delta at {target} is not in the range of the Gram matrix (residual {residual:e})")]
    NotInRange { target: String, residual: f64 },

    #[error("projection norm decreased at stage {stage}: {previous} -> {current}")]
    MonotonicityViolation {
        stage: usize,
        previous: f64,
        current: f64,
    },

    #[error("classification needs at least {needed} stages, got {got}")]
    TooFewStages { needed: usize, got: usize },

    #[error("closed form needs a right neighbor; index {0} is the last point")]
    BoundaryIndex(usize),

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("unknown vertex {0}")]
    UnknownVertex(String),

    #[error("network is disconnected or the grounded system is singular")]
    Disconnected,

    #[error("vertex {0} is the base point")]
    BasePoint(String),

    #[error("neighbor {neighbor} of {vertex} is missing from the sample base")]
    MissingNeighbor { vertex: String, neighbor: String },

    #[error("no weight defined for level {0}")]
    WeightUndefined(usize),

    #[error("word {0} is a leaf of the truncated tree")]
    BoundaryWord(String),

    #[error("the two words are identical")]
    IdenticalWords,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
