use thiserror::Error;

#[derive(Debug, Error)]
pub enum CogError {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("rule `{rule}` cannot be applied to {ballot} ballots")]
    IncompatibleBallot { rule: String, ballot: &'static str },

    #[error("unknown voting rule `{0}`")]
    UnknownRule(String),

    #[error("operation does not support rule `{0}`")]
    UnsupportedRule(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("solver did not converge: {what} (residual {residual:e})")]
    NonConvergence { what: String, residual: f64 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CogError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CogError::Validation(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, CogError>;
