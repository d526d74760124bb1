use thiserror::Error;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LabError {
    /// An argument lies outside the domain of a formula or sampler.
    #[error("domain error: {0}")]
    Domain(String),

    /// A request would exceed a fixed work or memory budget.
    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("insufficient scales: {0}")]
    InsufficientScales(String),

    #[error("range error: {0}")]
    Range(String),

    /// A Brownian path ran out of steps before reaching the deepest level.
    #[error("horizon exceeded: {0}")]
    Horizon(String),

    #[error("chain orientation mismatch: expected {expected}, found {found}")]
    Orientation {
        expected: &'static str,
        found: &'static str,
    },

    #[error("point swallowed at step {step}")]
    Swallowed { step: usize },

    #[error("all {replicas} replicas failed; first error: {first}")]
    AllReplicasFailed { replicas: usize, first: String },

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl LabError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        LabError::Domain(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        LabError::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
