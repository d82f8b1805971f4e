use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("enumeration cap exceeded: {size} > cap {cap}")]
    CapExceeded { size: u128, cap: u128 },
    #[error("period must be positive")]
    NonPositivePeriod,
    #[error("periods {0} and {1} have no common multiple within the configured bound")]
    Incommensurable(String, String),
    #[error("window must be bounded")]
    Unbounded,
    #[error("empty set: {0}")]
    Empty(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("infinite density: {0}")]
    InfiniteDensity(String),
    #[error("density estimate did not converge (last ratios {0})")]
    NotConverged(String),
    #[error("packing condition fails: {0} is a nonzero common difference of H-H and S-S")]
    PackingViolated(String),
    #[error("verification failed in {stage}: {detail}")]
    Verification { stage: String, detail: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn verification(stage: &str, detail: impl Into<String>) -> Self {
        Error::Verification {
            stage: stage.to_string(),
            detail: detail.into(),
        }
    }

    /// Process exit status used by the command line front end:
    /// 2 for unreadable or malformed input, 4 for a failed verification,
    /// 3 for every other precondition failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Io(_) => 2,
            Error::Verification { .. } => 4,
            _ => 3,
        }
    }
}
