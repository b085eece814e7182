use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A configured size cap would be exceeded.
    #[error("{what}: size cap exceeded (required {required}, allowed {allowed})")]
    CapExceeded {
        what: String,
        required: u128,
        allowed: usize,
    },
    /// Two structures or a structure and a spec disagree on their signature.
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    /// Two signatures that must be disjoint share a symbol.
    #[error("signature overlap: symbol `{0}` occurs on both sides")]
    SignatureOverlap(String),
    /// A text artifact could not be parsed.
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    /// An operation was called outside its precondition.
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
