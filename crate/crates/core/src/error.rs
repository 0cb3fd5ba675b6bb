use thiserror::Error;

/// Errors produced by the estimation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    /// A parameter violated its documented precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Parameters are valid but make a loop unable to terminate in practice
    /// (for example an aggressive rounding bias).
    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    /// No parameter setting satisfies the requested privacy target.
    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    /// Mismatched messages handed to secure aggregation.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// An iterative numerical routine failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Reading a config file or writing results failed.
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit status for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Io(_) => 2,
            Error::Infeasible(_) | Error::Degenerate(_) => 3,
            Error::Protocol(_) | Error::Numerical(_) => 4,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
