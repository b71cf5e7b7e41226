use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed line {0}")]
    MalformedLine(usize),
    #[error("unknown video id `{0}`")]
    UnknownVideo(String),
    #[error("fixation out of bounds at line {0}")]
    OutOfBounds(usize),
    #[error("grid has zero width or height")]
    EmptyGrid,
    #[error("no fixations on video")]
    NoFixations,
    #[error("insufficient subjects for the requested protocol")]
    InsufficientSubjects,
    #[error("no eligible frames after the skip window")]
    NoEligibleFrames,
    #[error("need at least two strings")]
    InsufficientStrings,
    #[error("unsmoothed Markov row {0} has no outgoing transitions")]
    ZeroDivision(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("no frame contains a fixated point")]
    NoFixatedFrames,
    #[error("labels contain a single class only")]
    DegenerateLabels,
    #[error("fewer points than clusters ({points} < {k})")]
    TooFewPoints { points: usize, k: usize },
    #[error("input must be non-negative")]
    NegativeInput,
    #[error("need at least two descriptors")]
    TooFewDescriptors,
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("need at least two frames")]
    SingleFrame,
    #[error("descriptor support window is degenerate")]
    DegenerateWindow,
    #[error("gram matrix is not positive semi-definite (min eigenvalue {0})")]
    NotPsd(f64),
    #[error("no positive labels")]
    NoPositives,
    #[error("bad file format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
