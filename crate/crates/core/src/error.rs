use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure categories. The runner maps these onto process exit codes, so
/// new variants must be classified in [`Error::kind`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid disorder law: {0}")]
    InvalidLaw(String),

    #[error("index {index:?} outside of box with side {side}")]
    OutOfRange { index: Vec<i64>, side: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("dense oracle refused: {nodes} nodes exceeds the limit of {limit}")]
    SizeGuard { nodes: usize, limit: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("conjugate gradient did not converge in {iterations} iterations (last relative residual {:.3e})", residual_history.last().copied().unwrap_or(f64::NAN))]
    NonConvergence {
        iterations: usize,
        residual_history: Vec<f64>,
    },

    #[error("internal consistency violated: {0}")]
    Consistency(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("too many failed samples: {skipped} of {total}")]
    ExcessSkips { skipped: usize, total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification of an [`Error`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Solver,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidLaw(_)
            | Error::OutOfRange { .. }
            | Error::Config(_)
            | Error::GridMismatch(_)
            | Error::SizeGuard { .. }
            | Error::InsufficientData(_) => ErrorKind::Validation,
            Error::Singular(_)
            | Error::NonConvergence { .. }
            | Error::Consistency(_)
            | Error::ExcessSkips { .. } => ErrorKind::Solver,
            Error::Io(_) => ErrorKind::Io,
        }
    }
}
