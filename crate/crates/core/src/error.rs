use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("fine mesh with {n_fine} elements cannot be coarsened {coarsenings} times by bisection")]
    NotDivisible { n_fine: usize, coarsenings: u32 },

    #[error("coarsest mesh has {n_elements} element(s); at least 2 are needed for an interior dof")]
    TooCoarse { n_elements: usize },

    #[error("number of levels must be at least 1")]
    NoLevels,

    #[error("level index {index} out of range for a hierarchy with {levels} levels")]
    LevelOutOfRange { index: usize, levels: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("exponent s = {s} outside [{lo}, {hi}]")]
    ExponentOutOfRange { s: f64, lo: f64, hi: f64 },

    #[error("{0} is not positive definite")]
    NotPositiveDefinite(String),

    #[error("CG breakdown at iteration {iteration}: {quantity} = {value:e}")]
    Breakdown {
        iteration: usize,
        quantity: &'static str,
        value: f64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
