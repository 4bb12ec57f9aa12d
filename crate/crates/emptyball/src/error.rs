use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("absolute moment of order {order} unavailable (finite orders are < {alpha})")]
    MomentUnavailable { order: f64, alpha: f64 },

    #[error(
        "no truncation window of radius <= {limit} certifies mass {eps}; \
         the step law's moments are too weak for this regime"
    )]
    WindowUnbounded { limit: f64, eps: f64 },

    #[error("regime error: {0}")]
    Regime(String),

    #[error("iteration did not stabilize within {iterations} steps: {context}")]
    NoConvergence { iterations: usize, context: String },

    #[error("unsupported offspring law: {0}")]
    UnsupportedLaw(String),

    #[error("instance too large for exact enumeration: {0}")]
    TooLarge(String),

    #[error("non-positive no-hit probability at lattice site {site}")]
    NonPositive { site: i64 },

    #[error("capped runs exceed 1% of fields ({capped}/{total}); estimate is biased")]
    CapExceeded { capped: usize, total: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
