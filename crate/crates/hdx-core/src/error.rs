//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Crate-wide error enum.
///
/// Construction errors (`Purity`, `DuplicateFace`, ...) come from building
/// complexes, operator errors (`Dimension`, `NotReversible`, ...) from the
/// walk and spectral machinery, and the remaining variants from the bound
/// solvers and the entropy optimizer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("purity violation: {0}")]
    Purity(String),

    #[error("duplicate face {0}")]
    DuplicateFace(String),

    #[error("empty complex: {0}")]
    EmptyComplex(String),

    #[error("level out of range: {0}")]
    LevelOutOfRange(String),

    #[error("not a face of the complex: {0}")]
    NotAFace(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("disconnected graph: {0}")]
    DisconnectedGraph(String),

    #[error("instance too large: {0}")]
    InstanceTooLarge(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("operator not reversible: {0}")]
    NotReversible(String),

    #[error("degenerate state space: {0}")]
    DegenerateStateSpace(String),

    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),

    #[error("invalid spectral profile: {0}")]
    InvalidProfile(String),

    #[error("profile not admissible (first violation at index {index})")]
    Admissibility { index: usize },

    #[error("negative function value: {0}")]
    NegativeFunction(String),

    #[error("support mismatch: {0}")]
    Support(String),

    #[error("optimization failed: {0}")]
    OptimizationFailed(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed instance: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
