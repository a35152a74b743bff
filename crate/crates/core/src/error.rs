use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("degree {requested} exceeds the configured maximum {max}")]
    DegreeCap { requested: usize, max: usize },

    #[error("there is no tree of degree 0")]
    ZeroDegree,

    #[error("coefficient of a degree-{needed} forest is not represented by a series truncated at {trunc}")]
    Truncation { needed: usize, trunc: usize },

    #[error("truncation mismatch: {left:?} vs {right:?}")]
    TruncMismatch {
        left: Option<usize>,
        right: Option<usize>,
    },

    #[error("{0} needs a finite truncation degree")]
    Unbounded(&'static str),

    #[error("expected constant term {expected}, found {found}")]
    ConstantTerm { expected: String, found: String },

    #[error("series is not a character: {0}")]
    NotCharacter(String),

    #[error("series is not an infinitesimal character: {0}")]
    NotInfCharacter(String),

    #[error("series is not a Lie element: {0}")]
    NotLieElement(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("fixed-point iteration did not converge in {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("invalid step size: {0}")]
    InvalidStep(String),

    #[error("degenerate step list: {0}")]
    DegenerateSteps(String),

    #[error("invalid series JSON: {0}")]
    Json(String),
}
