use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("base must be at least 2, got {0}")]
    BadBase(u64),
    #[error("length must be at least 1, got {0}")]
    BadLength(u64),
    #[error("digit {digit} at position {position} is out of range for base {base}")]
    DigitOutOfRange {
        digit: u64,
        position: usize,
        base: u64,
    },
    #[error("blocks must contain at least one digit")]
    EmptyBlock,
    #[error("represented length {length} exceeds the limit {limit}")]
    TooLong { length: String, limit: u64 },
    #[error("{what} is out of range")]
    OutOfRange { what: String },
    #[error("{what} needs {needed} evaluations, over the budget of {budget}")]
    Unfeasible {
        what: String,
        needed: u128,
        budget: u64,
    },
    #[error("basic sequence is not defined at index {0}")]
    Undefined(String),
    #[error("degenerate schedule at index {index}: {reason}")]
    DegenerateSchedule { index: u64, reason: String },
    #[error("block friendly family invariant violated at index {index}: {reason}")]
    BffInvariant { index: u64, reason: String },
    #[error("bad scale override: {0}")]
    BadScale(String),
    #[error("k = {k} is not in the range set {range}")]
    KOutOfRange { k: u32, range: String },
    #[error("line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("writing output failed: {0}")]
    Output(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}
