use thiserror::Error;

/// Errors surfaced by the numerical layers.
///
/// The CLI maps these onto process exit codes, so the variants are kept
/// coarse: what the caller can do about the failure matters more than the
/// exact site it came from.
#[derive(Debug, Error)]
pub enum Error {
    /// A requested table or buffer would exceed the configured memory budget.
    #[error("capacity: {0}")]
    Capacity(String),

    /// An index or modulus falls outside the range a table was built for.
    #[error("out of range: {0}")]
    Range(String),

    /// A parameter violates its documented domain (z outside (0,1), ...).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A floating-point result failed an exactness check it must satisfy.
    #[error("numeric integrity: {0}")]
    NumericIntegrity(String),

    /// A series or search did not certify convergence within its budget.
    #[error("divergence suspected: {0}")]
    DivergenceSuspected(String),

    /// An operation was asked for values outside the domain of its inputs.
    #[error("domain: {0}")]
    Domain(String),

    /// A resume checkpoint does not belong to the run being resumed.
    #[error("checkpoint mismatch: {0}")]
    CheckpointMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
