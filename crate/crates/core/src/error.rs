use thiserror::Error;

pub type Result<T, E = QkError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum QkError {
    /// A construction or operation parameter is out of range; `field` names it.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("group of order {0} is not a p-group")]
    NotPGroup(usize),

    #[error("infeasible at this scale: {0}")]
    Infeasible(String),

    /// An internal consistency check (associativity, boundary of boundary,
    /// torsion-freeness, ...) failed.
    #[error("invariant violated: {0}")]
    InvariantViolated(String),

    #[error("malformed Cayley table: {0}")]
    CayleyTable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl QkError {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        QkError::InvalidParameter { field: field.to_string(), reason: reason.into() }
    }
}
