use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sparsity level k = {k} is out of range for dimension {d}")]
    SparsityOutOfRange { k: usize, d: usize },

    #[error("empty set: {0}")]
    EmptySet(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("not a norm: {0}")]
    NotANorm(String),

    #[error("enumeration too large: {count} supports exceeds the guard of {limit}")]
    EnumerationTooLarge { count: u128, limit: u128 },

    #[error("solver did not converge within {iterations} iterations (gap {gap:e})")]
    NoConvergence { iterations: usize, gap: f64 },

    #[error("function is not proper: {0}")]
    NotProper(String),

    #[error("certified bound violated: dual value {dual} exceeds exact value {exact} + tolerance {tol}")]
    BoundViolated { dual: f64, exact: f64, tol: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
