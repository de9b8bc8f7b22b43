use thiserror::Error;

/// Errors raised by state construction, model building and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system shape: {0}")]
    InvalidShape(String),

    #[error("unit index {index} out of range for {n_units} units")]
    InvalidSubsystem { index: usize, n_units: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch between operands")]
    ShapeMismatch,

    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (minimum eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("trace is not one (got {0})")]
    BadTrace(f64),

    #[error("matrix does not lie in the algebra of the shape (off-block entry {0:.3e})")]
    NotInAlgebra(f64),

    #[error("degenerate hermitized pair (norm {0:.3e})")]
    DegeneratePair(f64),

    #[error("basis is not closed under adjoints (element {0})")]
    NotAdjointClosed(usize),

    #[error("invalid hypergraph: {0}")]
    InvalidHypergraph(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("operation requires all units to be classical")]
    QuantumUnit,

    #[error("negative entry {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("support set is empty")]
    EmptySupport,

    #[error("exhaustion guard exceeded: {count} subsets > limit {limit}")]
    GuardExceeded { count: u128, limit: u128 },

    #[error("non-physical Bell-diagonal parameters: {0}")]
    NonPhysical(String),

    #[error("weights are not normalized (sum {0})")]
    Unnormalized(f64),

    #[error("integer overflow in exact elimination")]
    IntegerOverflow,

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
