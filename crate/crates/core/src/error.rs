use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    /// The SVD iteration did not converge. `atom` names the offending
    /// rank-one block when the failure happened inside a solver sweep.
    #[error("SVD did not converge{}", .atom.map(|k| format!(" (atom {k})")).unwrap_or_default())]
    SvdFailure { atom: Option<usize> },

    #[error("penalty bound violated: rho{index} = {rho} must exceed beta{index} + 2 = {bound}")]
    PenaltyBound {
        index: usize,
        rho: f64,
        bound: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed {what}: {msg}")]
    Format { what: &'static str, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn format(what: &'static str, msg: impl Into<String>) -> Self {
        Error::Format {
            what,
            msg: msg.into(),
        }
    }

    /// Attach an atom index to an SVD failure.
    pub(crate) fn at_atom(self, k: usize) -> Self {
        match self {
            Error::SvdFailure { .. } => Error::SvdFailure { atom: Some(k) },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
