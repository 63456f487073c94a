use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}{}: {message}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        line: u64,
        column: Option<usize>,
        message: String,
    },

    #[error("{0}")]
    Input(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] bnpmi_core::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// Process exit status: 2 for bad input, 3 for numerical degeneracy,
    /// 4 when no concentration could be elicited.
    pub fn exit_code(&self) -> i32 {
        use bnpmi_core::Error as E;
        match self {
            CliError::Parse { .. } | CliError::Input(_) | CliError::Io { .. } => 2,
            CliError::Core(e) => match e.root() {
                E::ElicitationFailed { .. } => 4,
                E::DegenerateSupport { .. }
                | E::DegeneratePrior
                | E::ZeroPriorMass { .. }
                | E::CholeskyFailure
                | E::InsufficientDraws { .. } => 3,
                _ => 2,
            },
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        match e.into_kind() {
            csv::ErrorKind::Io(source) => CliError::Io {
                path: "<csv>".into(),
                source,
            },
            other => CliError::Parse {
                line,
                column: None,
                message: format!("{other:?}"),
            },
        }
    }
}
