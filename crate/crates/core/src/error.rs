use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("regions overlap")]
    RegionOverlap,
    #[error("region mismatch: {0}")]
    RegionMismatch(String),
    #[error("Hilbert dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: u128, cap: usize },
    #[error("size cap exceeded: {0}")]
    SizeCap(String),
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("operator is not traceless (trace {trace:e})")]
    NotTraceless { trace: f64 },
    #[error("operator is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NonPositiveDefinite { min_eigenvalue: f64 },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("inconsistent marginals in {family} family between volumes {a} and {b} (deviation {deviation:e})")]
    InconsistentMarginals {
        family: String,
        a: usize,
        b: usize,
        deviation: f64,
    },
    #[error("state is not an explicit product of single-site factors: {0}")]
    NotProduct(String),
    #[error("state is not full rank (min eigenvalue {min_eigenvalue:e})")]
    NotFullRank { min_eigenvalue: f64 },
    #[error("solver did not converge within {iterations} iterations (gap {gap:e})")]
    MaxIterExceeded { iterations: usize, gap: f64 },
    #[error("unsupported lattice dimension {0}")]
    UnsupportedDimension(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = core::result::Result<T, Error>;
