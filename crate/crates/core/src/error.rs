use alloc::string::String;

/// Errors produced by the solvers and constructions in this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A construction needed generic (full-rank) channel blocks and did not get them.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),
    /// The antenna configuration admits no positive s.d.o.f. alignment.
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("internal consistency error: {0}")]
    Internal(String),
}

pub type Result<T> = core::result::Result<T, Error>;
