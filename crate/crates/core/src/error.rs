use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid permutation mapping {0:?}")]
    InvalidPermutation(Vec<usize>),

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("enumeration bound exceeded: {what} needs {needed}, bound is {bound}")]
    BoundExceeded {
        what: &'static str,
        needed: u128,
        bound: u128,
    },

    #[error("set {subset} is not contained in {superset}")]
    NotSubset { subset: String, superset: String },

    #[error("empty outcome set {0}")]
    EmptySet(String),

    #[error("duplicate vectors must be merged before this operation")]
    DuplicateVectors,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("permutation {0:?} is not an involution")]
    NotInvolution(Vec<usize>),

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error("linear system could not be solved: {0}")]
    SingularSystem(String),

    #[error("more than one recurrent class is reachable from state {state}")]
    MultipleRecurrentClasses { state: usize },

    #[error("utility vector has a tied maximum")]
    TiedMaximum,

    #[error("retargeting certificate is invalid: {0}")]
    InvalidCertificate(String),

    #[error("missing table entry for set {set} at {theta:?}")]
    MissingTableEntry { set: String, theta: Vec<f64> },

    #[error("theorem cross-check failed: {0}")]
    TheoremViolation(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
