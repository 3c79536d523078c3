use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("vertex index {0} out of range (mutable vertices are 1..={1})")]
    IndexOutOfRange(usize, usize),

    #[error("malformed quiver: {0}")]
    MalformedQuiver(String),

    #[error("integer overflow during mutation")]
    Overflow,

    #[error("sign coherence violated in row {0}: {1:?}")]
    SignCoherenceViolation(usize, Vec<i64>),

    #[error("vertex at step {0} is not green")]
    NotGreenAtStep(usize),

    #[error("replay mismatch: no green vertex carries c-vector {0:?}")]
    ReplayMismatch(Vec<i64>),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("unsupported class for this operation")]
    UnsupportedClass,

    #[error("bad index: {0}")]
    BadIndex(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("not a branch quiver: {0}")]
    NotABranchQuiver(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("classification data does not describe a central cycle with pendant triangles")]
    NotTypeIVCore,

    #[error("arc not in triangulation")]
    ArcNotInTriangulation,

    #[error("arcs about the marked point split into several fans")]
    NotComplete,

    #[error("construction invariant violated: {0}")]
    ConstructionInvariantViolated(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
