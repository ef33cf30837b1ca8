//! Interface synthesis for libraries written as guarded-update rules.
//!
//! A library is parsed from a small text format ([`model`]), its state sets
//! are represented symbolically ([`symstate`]), global states are
//! partitioned into regions ([`abstraction`]) which [`engine`] refines until
//! they separate the states from which a call must fail, and [`igraph`]
//! turns the final partition into an automaton over function names.
//! [`oracle`] re-derives everything by explicit enumeration for testing.

pub mod abstraction;
pub mod bundled;
pub mod cli;
pub mod engine;
pub mod igraph;
pub mod model;
pub mod oracle;
pub mod symstate;

use engine::EngineError;
use model::ModelError;
use oracle::OracleError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    /// A check ran to completion and found a problem.
    #[error("{0}")]
    CheckFailed(String),
}

impl Error {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Model(ModelError::Syntax { .. }) => 1,
            Error::Model(ModelError::Semantic(_)) => 2,
            Error::Engine(EngineError::RefinementStuck { .. }) => 3,
            Error::Engine(EngineError::NonTermination { .. }) => 4,
            Error::Oracle(OracleError::NonTermination { .. }) => 4,
            Error::Oracle(OracleError::StateCap(_)) => 5,
            Error::CheckFailed(_) => 6,
            Error::Io { .. } | Error::Usage(_) => 7,
        }
    }
}
