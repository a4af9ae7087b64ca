use thiserror::Error;

/// Which instance field a validation failure refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    D,
    A,
    B,
    Bounds,
    Rhs,
    Y,
    Labels,
    Dimension,
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Field::D => "d",
            Field::A => "a",
            Field::B => "b",
            Field::Bounds => "bounds",
            Field::Rhs => "r",
            Field::Y => "y",
            Field::Labels => "labels",
            Field::Dimension => "dimension",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum CqkError {
    #[error("invalid {field} at index {index}: {reason}")]
    Domain {
        field: Field,
        index: usize,
        reason: &'static str,
    },

    #[error("no stopping criterion met after {iterations} iterations (lambda = {lambda}, residual = {residual})")]
    MaxIterations {
        iterations: usize,
        lambda: f64,
        residual: f64,
    },

    #[error("contract violation: {0}")]
    ContractViolation(&'static str),

    #[error("empty index set")]
    EmptyIndexSet,

    #[error("generator family {0} does not produce this kind of instance")]
    FamilyMismatch(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("malformed instance file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = CqkError> = std::result::Result<T, E>;

pub(crate) fn domain(field: Field, index: usize, reason: &'static str) -> CqkError {
    CqkError::Domain {
        field,
        index,
        reason,
    }
}
