use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("unknown agent {0:?}")]
    UnknownAgent(String),

    #[error("unknown arc ({0}, {1})")]
    UnknownArc(String, String),

    #[error("flow is not conserved at agent {0:?}")]
    NotConserved(String),

    #[error("invalid flow: {0}")]
    InvalidFlow(String),

    #[error("invalid walk: {0}")]
    InvalidWalk(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("iteration cap of {cap} exceeded; last steps: {trace}")]
    IterationCap { cap: usize, trace: String },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
