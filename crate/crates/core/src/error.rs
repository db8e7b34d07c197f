use thiserror::Error;

/// Errors produced by the streaming library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A trace file line could not be parsed.
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    /// A request exceeded a hard enumeration cap.
    #[error("refused: {0}")]
    Refused(String),

    /// The LP solver failed to converge or reported an impossible state.
    #[error("solver error: {0}")]
    Solver(String),

    /// The event loop could not complete a session.
    #[error("simulation error at chunk {chunk}: {reason}")]
    Simulation { chunk: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
