use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("agent index {index} out of range for {n} agents")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("malformed rational {0:?}")]
    MalformedRational(String),
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(String),
    #[error("opinion profile is empty")]
    EmptyProfile,
    #[error("opinions are not sorted at index {0}")]
    Unsorted(usize),
    #[error("invalid instance parameters: {0}")]
    InvalidParams(String),
    #[error("profile at t={t} is not the successor of the profile at t={prev}", prev = .t - 1)]
    DynamicsMismatch { t: usize },
    #[error("trajectory truncated at t={0}; termination budget cannot be assessed")]
    Truncated(usize),
    #[error("malformed trajectory: {0}")]
    MalformedTrajectory(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
