use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample request for zero rows")]
    EmptyRequest,

    #[error("covariance matrix is not symmetric positive definite")]
    CholeskyFailure,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {index} has fewer than {k} neighbors at positive distance")]
    DegenerateSupport { index: usize, k: usize },

    #[error("coordinate {index} out of range for dimension {dim}")]
    IndexError { index: usize, dim: usize },

    #[error("unsupported distribution for this operation: {0}")]
    Unsupported(String),

    #[error("need at least {needed} draws, got {got}")]
    InsufficientDraws { needed: usize, got: usize },

    #[error("no prior draws fall inside [0, {c})")]
    ZeroPriorMass { c: f64 },

    #[error("all prior draws are identical")]
    DegeneratePrior,

    #[error("no concentration in the grid reaches probability 0.5 within tolerance; profile: {profile:?}")]
    ElicitationFailed { profile: Vec<(f64, f64)> },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, with stage annotations stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}
