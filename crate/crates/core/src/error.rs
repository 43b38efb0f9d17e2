use thiserror::Error;

pub type Result<T> = std::result::Result<T, GeometryError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    /// An argument is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix, point set or shape is (numerically) degenerate.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// An iterative or adaptive method did not reach its tolerance.
    #[error("convergence failure: {message}")]
    Convergence { message: String, best: Vec<f64> },

    /// A linear solve or fit is too ill-conditioned to trust.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A work-size guard tripped before any work was done.
    #[error("resource guard: {message} (estimated {estimate:.3e} candidates)")]
    Resource { message: String, estimate: f64 },

    /// A point set claimed to be centrally symmetric is not.
    #[error("symmetry violation: {0}")]
    Symmetry(String),

    /// A ratio has a zero denominator.
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),
}

impl GeometryError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        GeometryError::Domain(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        GeometryError::Degenerate(msg.into())
    }
}
