use thiserror::Error;

/// Errors shared across the crate. Message prefixes are stable and are part
/// of the CLI surface (tests match on them).
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape: expected {expected} vectors of length {expected}, got {got}")]
    Shape { expected: usize, got: String },

    #[error("not simplicial: cone generators are linearly dependent")]
    NotSimplicial,

    #[error("invalid presentation: {}", .0.join("; "))]
    Invalid(Vec<String>),

    #[error("not a face: {0}")]
    NotAFace(String),

    #[error("center must have codimension >= 2")]
    CenterTooSmall,

    #[error("duplicate label: {0}")]
    DuplicateLabel(String),

    #[error("unknown label: {0}")]
    UnknownLabel(String),

    #[error("wall not in presentation: {0}")]
    UnknownWall(String),

    #[error("not a divisorial wall: {0}")]
    NotDivisorialWall(String),

    #[error("wall has non-unit coefficients: {0}")]
    NonUnitWall(String),

    #[error("not extremal: {0}")]
    NotExtremal(String),

    #[error("presentation not realizable: {0}")]
    NotRealizable(String),

    #[error("not a fan: {0}")]
    NotAFan(String),

    #[error("not a stage presentation: {0}")]
    NotStagePresentation(String),

    #[error("construction aborted at stage {stage}, step {step}: {reason}")]
    Aborted {
        stage: usize,
        step: usize,
        reason: String,
    },

    #[error("bad argument: {0}")]
    BadArgument(String),

    #[error("json: {0}")]
    Json(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
