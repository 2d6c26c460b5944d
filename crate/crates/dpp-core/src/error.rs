//! Crate-wide error type.

/// Errors shared across all modules of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max asymmetry {max_asymmetry:e} exceeds tolerance {tol:e}")]
    NotHermitian { max_asymmetry: f64, tol: f64 },
    #[error("kernel eigenvalue {eigenvalue} lies outside [0, 1] beyond tolerance")]
    SpectrumOutOfRange { eigenvalue: f64 },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("eigendecomposition failed to converge or violated its accuracy contract")]
    DecompositionFailure,
    #[error("matrix is not unitary: max deviation {deviation:e} from W\u{2020}W = I")]
    NotUnitary { deviation: f64 },
    #[error("kernel is not a strict contraction: eigenvalue {eigenvalue} too close to 1")]
    NotStrictContraction { eigenvalue: f64 },
    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue}")]
    NotPsd { eigenvalue: f64 },
    #[error("index {index} out of range for ground set of size {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("subset must be nonempty")]
    EmptySubset,
    #[error("size {size} exceeds cap {cap} for {operation}")]
    DimensionTooLarge {
        size: usize,
        cap: usize,
        operation: String,
    },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("blocks are not pairwise disjoint")]
    BlocksNotDisjoint,
    #[error("too many wedge factors: {m} exceeds one-particle dimension {n}")]
    TooManyFactors { m: usize, n: usize },
    #[error("numerical inconsistency in {context}: {value:e}")]
    NumericalInconsistency { context: String, value: f64 },
    #[error(
        "sampler breakdown: diagonal mass {diagonal_mass} deviates from remaining rank {remaining_rank}"
    )]
    NumericalBreakdown {
        diagonal_mass: f64,
        remaining_rank: usize,
    },
    #[error("parameter out of range: {context}")]
    OutOfRange { context: String },
    #[error("graph is not connected")]
    Disconnected,
    #[error("parse error: {message}")]
    Parse { message: String },
    #[error("i/o error")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parse(message: impl Into<String>) -> Self {
        Error::Parse {
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
