use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("control and target must differ (both are {0})")]
    SameQubit(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector is not unit norm (norm {0})")]
    NotNormalized(f64),

    #[error("operator is not Hermitian (max residual {0:e})")]
    NotHermitian(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("class {0} has no samples")]
    EmptyClass(usize),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("least-squares system is rank deficient: {0}")]
    RankDeficient(String),

    #[error("bad IDX magic number {found:#010x} (expected {expected:#010x})")]
    BadMagic { expected: u32, found: u32 },

    #[error("truncated IDX data: needed {needed} bytes, found {found}")]
    Truncated { needed: usize, found: usize },

    #[error("IDX count mismatch: {images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("example {0} has zero norm and cannot be normalized")]
    ZeroNorm(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
