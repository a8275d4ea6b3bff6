use thiserror::Error;

/// Errors shared by every module of the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input data: mismatched lengths, repeated vertices, cells
    /// from the wrong structure, ill-defined table entries.
    #[error("structural error: {0}")]
    Structural(String),

    /// A configured bound was exceeded (group order, vertex count, search
    /// budget).
    #[error("capacity exceeded: {what} needs {needed}, bound is {limit}")]
    Capacity {
        what: String,
        needed: u128,
        limit: u128,
    },

    /// A horn had no filler, or a compatible completion does not exist.
    #[error("unfillable: {0}")]
    Unfillable(String),

    /// An operation's precondition does not hold for the given arguments.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Text input could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn unfillable(msg: impl Into<String>) -> Self {
        Error::Unfillable(msg.into())
    }

    pub fn capacity(what: impl Into<String>, needed: u128, limit: u128) -> Self {
        Error::Capacity {
            what: what.into(),
            needed,
            limit,
        }
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
