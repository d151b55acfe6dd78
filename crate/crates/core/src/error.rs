use thiserror::Error;

/// Contract violations raised by the library.
///
/// Measure-zero branches (vanishing ABL denominators, the degenerate corner of
/// the fidelity inversion) are not errors; they surface as `None` values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported dimension {0} (only 2 and 4 are supported)")]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("Jacobi eigensolver did not converge (off-diagonal {0:e})")]
    NoConvergence(f64),

    #[error("projector set is incomplete (deviation from identity {0:e})")]
    IncompleteProjectors(f64),

    #[error("index {index} out of range for {what}")]
    IndexOutOfRange { what: &'static str, index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Table 1 violation: {0}")]
    Table1Violation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
