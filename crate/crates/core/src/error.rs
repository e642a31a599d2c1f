use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix dimension {0} outside supported range 1..=32")]
    UnsupportedDimension(usize),

    #[error("matrix is singular")]
    Singular,

    #[error("matrix is not unit upper-triangular")]
    NotUpperTriangular,

    #[error("invalid block structure: {0}")]
    InvalidStructure(String),

    #[error("index {index} out of range for m = {m}")]
    IndexOutOfRange { index: u64, m: usize },

    #[error("information set is not decreasing")]
    NotDecreasing,

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),

    #[error("K = {k} out of range for n = {n}")]
    KOutOfRange { k: usize, n: usize },

    #[error("erasure probability must lie strictly between 0 and 1, got {0}")]
    InvalidErasure(f64),

    #[error("opposing infinite LLRs in g update")]
    OpposingInfinities,

    #[error("LLR vector contains NaN")]
    NanLlr,

    #[error("not a permutation: {0}")]
    NotAPermutation(String),

    #[error("transformation is not an automorphism of the code")]
    NotAutomorphism,

    #[error("requested {requested} non-equivalent automorphisms but only {available} classes exist")]
    EnsembleTooLarge { requested: String, available: String },

    #[error("ensemble sampling gave up after {0} attempts")]
    SamplingExhausted(usize),

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
