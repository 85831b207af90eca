use thiserror::Error;

pub type Result<T, E = FiberError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FiberError {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("not graphical: {0}")]
    NotGraphical(String),

    #[error("infeasible target: {0}")]
    Infeasible(String),

    #[error("estimation failed at step {step}: {reason}")]
    Estimation { step: usize, reason: String },

    #[error("exhaustive enumeration limited to n <= {max}, got n = {n}")]
    OracleLimit { n: usize, max: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl FiberError {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        FiberError::Input(msg.into())
    }

    pub(crate) fn estimation(step: usize, reason: impl Into<String>) -> Self {
        FiberError::Estimation {
            step,
            reason: reason.into(),
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            FiberError::Input(_)
            | FiberError::Parse { .. }
            | FiberError::Io(_)
            | FiberError::Json(_) => 2,
            FiberError::NotGraphical(_) | FiberError::Infeasible(_) => 3,
            FiberError::Estimation { .. } => 4,
            FiberError::OracleLimit { .. } => 5,
        }
    }
}
