use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("nonzero padding bits in packed bit string")]
    NonzeroPadding,
    #[error("inconsistent rates: {0}")]
    InvalidRates(String),
    #[error("detector (x={x}, theta={theta}) has no counts; cannot equalize onto an empty detector")]
    EmptyDetector { x: u8, theta: u8 },
    #[error("invalid code dimensions n={n}, k={k}")]
    InvalidCode { n: usize, k: usize },
    #[error("block length {n} too large for exhaustive search (max {max})")]
    CodeTooLarge { n: usize, max: usize },
    #[error("invalid hash output length l={l} for input length n={n}")]
    InvalidHashLength { n: usize, l: usize },
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("channel exhausted after {got} of {needed} rounds")]
    ChannelExhausted { needed: usize, got: usize },
    #[error("{0} stream is not time-sorted")]
    Unsorted(&'static str),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("malformed code file: {0}")]
    CodeFile(String),
}
