use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A requested table, lattice or product exceeds what fits in the
    /// supported integer width or memory ceiling.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("index {index} out of range for block {block} of size {size}")]
    IndexOutOfRange {
        block: usize,
        index: usize,
        size: usize,
    },

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("zero vector")]
    ZeroVector,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// The parameter regime yields no convergence claim to the left of zero.
    #[error("epsilon = {0} is not positive; the sigma_c bound is not below zero for these parameters")]
    NonPositiveEpsilon(f64),

    #[error("no sup-norm witness supplied for level {0}")]
    MissingWitness(u32),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("simultaneous approximation not achieved up to t = {t_max}: worst residual/delta ratio {best_ratio} at t = {best_t}")]
    SearchExhausted {
        t_max: f64,
        best_t: f64,
        best_ratio: f64,
        residuals: Vec<f64>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
