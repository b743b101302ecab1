use std::fmt;

use thiserror::Error;

/// Construction-time violations of the specification invariants.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("invalid variable name `{0}`")]
    InvalidName(String),
    #[error("`start` is reserved and cannot be declared or referenced")]
    ReservedStart,
    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("literal set contains both `{0}` and `!{0}`")]
    InconsistentLiterals(String),
    #[error("transition index {0} used more than once")]
    DuplicateIndex(u32),
}

/// A diagnostic from one of the text parsers, positioned at a 1-based
/// line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle scale exceeded: {vars} free variables, limit is {limit}")]
    ScaleExceeded { vars: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelCheckError {
    #[error("state {0} is not mapped by the interpretation")]
    UnmappedState(String),
}

/// Errors from loading a raw specification document.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}
