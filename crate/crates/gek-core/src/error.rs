use thiserror::Error;

/// Failure classes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GekError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("structure error: {0}")]
    Structure(String),
    #[error("convergence error: {0}")]
    Convergence(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("numeric error: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, GekError>;

impl GekError {
    /// True for errors caused by bad caller input rather than numerics.
    pub fn is_usage(&self) -> bool {
        matches!(self, GekError::Domain(_) | GekError::Structure(_) | GekError::Usage(_))
    }
}
