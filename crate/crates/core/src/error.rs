use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {x} lies on critical point {c}")]
    CriticalPoint { x: f64, c: f64 },

    #[error("branch value {value} at x = {x} leaves [0,1]")]
    RangeViolation { x: f64, value: f64 },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("flat branch at critical point {c} ({side}): {reason}")]
    FlatBranch { c: f64, side: &'static str, reason: String },

    #[error("gap overlap: {0}")]
    GapOverlap(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("degenerate family: {0}")]
    DegenerateFamily(String),

    #[error("attractor estimate is not classified")]
    NotClassified,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("shadowing failed: {0}")]
    ShadowingFailed(String),

    #[error("resolution {eps} is finer than the guard {guard}")]
    ResolutionTooFine { eps: f64, guard: f64 },

    #[error("dichotomy violation between components of {c1} and {c2}: overlap fraction {fraction:.3}")]
    DichotomyViolation { c1: f64, c2: f64, fraction: f64 },

    #[error("envelope violation at n = {n}: observed {observed} outside [{lower}, {upper}]")]
    EnvelopeViolation { n: u64, observed: f64, lower: f64, upper: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
