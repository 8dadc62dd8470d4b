//! Crate-wide error type.

/// Errors produced by construction, simulation, and inversion routines.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector/matrix dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A coefficient vector does not have the claimed structure
    /// (e.g. its a-sequence violates the ratio recursion).
    #[error("inconsistent coefficients: {0}")]
    InconsistentCoefficients(String),

    /// A root-finding problem has no solution in the admissible range.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// The coefficients correspond to parameters on the boundary of the
    /// admissible set, where the inverse map degenerates.
    #[error("singular structure: {0}")]
    SingularStructure(String),

    /// The structure tag of a coefficient vector is not supported by the
    /// requested inversion.
    #[error("unsupported structure: {0}")]
    UnsupportedStructure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
