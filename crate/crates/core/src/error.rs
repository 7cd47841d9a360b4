use thiserror::Error;

/// Errors raised by the transfer, search and oracle routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PgstError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Sender sites `1..=m` and receiver sites `n-m+1..=n` intersect.
    #[error("regions overlap: chain of {n} sites cannot host two disjoint blocks of {m} sites")]
    RegionsOverlap { n: usize, m: usize },

    /// A stated precondition of a bound or formula does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A dense sector would exceed the desk-scale size guard.
    #[error("resource guard: sector dimension C({n},{r}) = {dim} exceeds limit {limit}")]
    Resource {
        n: usize,
        r: usize,
        dim: u128,
        limit: usize,
    },
}

pub type Result<T> = std::result::Result<T, PgstError>;

pub(crate) fn domain(msg: impl Into<String>) -> PgstError {
    PgstError::Domain(msg.into())
}
