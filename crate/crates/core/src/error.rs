use std::fmt;

use thiserror::Error;

/// A single failed invariant found while validating a signature, algebra or model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl Violation {
    pub fn new(location: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            location: location.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown {kind} `{name}`")]
    UnknownSymbol { kind: &'static str, name: String },
    #[error("sort mismatch in {place}: expected {expected}, found {found}")]
    SortMismatch {
        place: String,
        expected: String,
        found: String,
    },
    #[error("arity mismatch for `{name}`: expected {expected} arguments, found {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("context mismatch: {0}")]
    ContextMismatch(String),
    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("point space has {size} points, above the cap of {cap}")]
    SpaceTooLarge { size: u128, cap: usize },
    #[error("element {element} out of range for sort {sort} of size {size}")]
    ElementOutOfRange { sort: String, element: usize, size: usize },
    #[error("invalid structure: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("formula is not elementary (contains a substitution node)")]
    NotElementary,
    #[error("algebras do not share a signature")]
    SignatureMismatch,
    #[error("{0}")]
    Other(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
