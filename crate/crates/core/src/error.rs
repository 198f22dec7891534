use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("cone is not strongly convex (it contains a line)")]
    NotStronglyConvex,

    #[error("{what}: needs bound {needed}, configured bound is {bound}")]
    BoundExceeded {
        what: String,
        needed: String,
        bound: String,
    },

    #[error("no index found for {point} within cap {cap}")]
    IndexNotFound { point: String, cap: u64 },

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("value does not fit in a machine integer: {0}")]
    Overflow(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("ambiguous walk step {step}: point lies on a wall between cones {cones:?}")]
    AmbiguousStep { step: u64, cones: Vec<usize> },

    #[error("degenerate approximant: q*x_i is an exact integer for coordinates {0:?}")]
    Degenerate(Vec<usize>),

    #[error("no approximant with q <= {q_max}")]
    ApproximantNotFound { q_max: u64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
