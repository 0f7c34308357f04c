use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("enumeration cap exceeded: C({m},{p}) = {count} subsets, limit is {limit}")]
    EnumerationCap {
        m: usize,
        p: usize,
        count: u128,
        limit: u128,
    },

    #[error("optimal value of objective f{objective} is zero, deviation is undefined")]
    ZeroOptimum { objective: usize },

    #[error("zero utility under a minimized value function, roulette probability is undefined")]
    ZeroUtility,

    #[error("BRSD is undefined: the optimum has zero value")]
    ZeroReference,

    #[error("decision maker unavailable: {0}")]
    DecisionMaker(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used for process exit codes and HTTP statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
    Interrupted,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse(_) | Error::Validation(_) | Error::EnumerationCap { .. } => {
                ErrorKind::Validation
            }
            Error::ZeroOptimum { .. } | Error::ZeroUtility | Error::ZeroReference => {
                ErrorKind::Numerical
            }
            Error::DecisionMaker(_) => ErrorKind::Interrupted,
            Error::Io(_) => ErrorKind::Io,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
