use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("record format: {0}")]
    RecordFormat(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed dictionary at line {line}: {reason}")]
    MalformedDictionary { line: usize, reason: String },

    #[error("malformed word list at line {line}: {reason}")]
    MalformedWordList { line: usize, reason: String },

    #[error("insufficient tail data: {usable} usable points, need at least {needed}")]
    InsufficientTailData { usable: usize, needed: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty word list")]
    EmptyWordList,

    #[error("orderings do not contain the same words")]
    MismatchedOrderings,

    #[error("zero rank variance")]
    ZeroRankVariance,

    #[error("zero variance")]
    ZeroVariance,

    #[error("non-positive value for {item} cannot be log-transformed")]
    NonPositiveLog { item: String },

    #[error("need at least {needed} pairs, got {got}")]
    TooFewPairs { needed: usize, got: usize },
}
