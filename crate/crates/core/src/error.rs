use alloc::string::String;

use crate::game::Action;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("terminal-state")]
    TerminalState,
    #[error("illegal-move: {0}")]
    IllegalMove(Action),
    #[error("target-mismatch")]
    TargetMismatch,
    #[error("pool-exhausted")]
    PoolExhausted,
    #[error("unknown-record: {0}")]
    UnknownRecord(String),
    #[error("invalid-notation: {0}")]
    InvalidNotation(String),
    #[error("invalid-spec: {0}")]
    InvalidSpec(&'static str),
    #[error("invalid-config: {0}")]
    InvalidConfig(&'static str),
    #[error("invalid-feature: {0}")]
    InvalidFeature(&'static str),
}

impl Error {
    /// Stable short code, the part of the message before any detail.
    pub fn code(&self) -> &'static str {
        match self {
            Error::TerminalState => "terminal-state",
            Error::IllegalMove(_) => "illegal-move",
            Error::TargetMismatch => "target-mismatch",
            Error::PoolExhausted => "pool-exhausted",
            Error::UnknownRecord(_) => "unknown-record",
            Error::InvalidNotation(_) => "invalid-notation",
            Error::InvalidSpec(_) => "invalid-spec",
            Error::InvalidConfig(_) => "invalid-config",
            Error::InvalidFeature(_) => "invalid-feature",
        }
    }
}
