use thiserror::Error;

use crate::dag::DagError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("strings are over different alphabets")]
    AlphabetMismatch,
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error("the only common subsequence is the empty string")]
    NoLcs,
    #[error("infeasible: need {needed} distinct strings, language has {available}")]
    Infeasible { needed: usize, available: usize },
    #[error("budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
