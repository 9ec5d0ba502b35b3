use thiserror::Error;

/// Errors produced by the qsl library.
#[derive(Debug, Error)]
pub enum QslError {
    #[error("invalid lattice: {reason}")]
    InvalidLattice { reason: String },

    #[error("lattice mismatch between operands")]
    LatticeMismatch,

    #[error("index {index} out of range for lattice of depth {depth}")]
    IndexOutOfRange { index: i64, depth: usize },

    #[error("super-lattice value f(a/q) required but not present")]
    MissingSuperValue,

    #[error("tail of q-derivative at zero did not converge: slopes {s0:e} and {s1:e} disagree")]
    NonConvergentTail { s0: f64, s1: f64 },

    #[error("series did not converge within {max_terms} terms (|z| too large)")]
    SeriesDivergence { max_terms: usize },

    #[error("overflow in {context}: magnitude exceeded {limit:e}")]
    Overflow { context: String, limit: f64 },

    #[error("no sign change found for {what} near seed {seed:e}")]
    BracketNotFound { what: String, seed: f64 },

    #[error("found only {found} of {requested} eigenvalues in scan window")]
    MissedBracket { found: usize, requested: usize },

    #[error("root at {lambda:e} is degenerate: |derivative| below {floor:e}")]
    DegenerateRoot { lambda: f64, floor: f64 },

    #[error("{lambda:e} is not an eigenvalue: inverse-iteration residual {residual:e}")]
    NotAnEigenvalue { lambda: f64, residual: f64 },

    #[error("admissibility violated at index {index}: 1 + c*alpha = {value:e} <= 0")]
    Inadmissible { index: usize, value: f64 },

    #[error("spectral data mismatch at index {index}: {detail}")]
    SpectrumMismatch { index: usize, detail: String },

    #[error("linear system singular in {context}")]
    SingularSystem { context: String },

    #[error("config error: {reason}")]
    Config { reason: String },
}

impl QslError {
    /// Process exit code associated with this error class.
    pub fn exit_code(&self) -> u8 {
        match self {
            QslError::Config { .. } => 1,
            QslError::Inadmissible { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, QslError>;
