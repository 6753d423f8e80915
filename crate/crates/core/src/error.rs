use thiserror::Error;

/// Errors produced while building problems or running solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid demand distribution: {0}")]
    InvalidDemand(String),
    #[error("invalid holding cost: {0}")]
    InvalidHolding(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("discount factor {0} is outside the admissible range")]
    InvalidAlpha(f64),
    #[error("holding cost is not convex at grid point {at}")]
    NonConvex { at: i64 },
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("degenerate policy chain: {0}")]
    Degenerate(String),
    #[error("reducible policy chain: {0}")]
    Reducible(String),
    #[error("state space of {size} states exceeds the cap of {cap}")]
    StateSpaceTooLarge { size: usize, cap: usize },
    #[error("convolved holding cost is not finite: {0}")]
    InfiniteCost(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
