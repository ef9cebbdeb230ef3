use thiserror::Error;

/// Errors raised by the library. Solver and assertion failures carry a
/// diagnostic message; domain errors name the offending prompt when known.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("domain error at prompt {prompt}: {message}")]
    DomainAt { prompt: usize, message: String },
    #[error("singular matrix: {0}")]
    SingularMatrix(String),
    #[error("map is not an involution")]
    NotInvolution,
    #[error("infeasible constraint set: {0}")]
    Infeasible(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("missing constant: {0}")]
    MissingConstant(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
}

impl Error {
    pub(crate) fn at(prompt: usize, err: Error) -> Error {
        match err {
            Error::Domain(message) => Error::DomainAt { prompt, message },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
