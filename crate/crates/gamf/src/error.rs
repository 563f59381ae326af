use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GamfError {
    #[error("adapter `{0}` is already registered")]
    DuplicateAdapter(String),
    #[error("adapter `{0}` is not registered")]
    UnknownAdapter(String),
    #[error("adapter `{0}` is protected and cannot be removed")]
    ProtectedAdapter(String),
    #[error("event type `{event_type}` is already claimed by generator `{claimed_by}`")]
    ClaimConflict {
        event_type: String,
        claimed_by: String,
    },
    #[error("generator `{generator}` may not record `{event_type}` (claimed by `{claimed_by}`)")]
    ClaimViolation {
        generator: String,
        event_type: String,
        claimed_by: String,
    },
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("metric value must be finite, got {0}")]
    NonFiniteMetric(f64),
    #[error("periodic trigger interval must be > 0")]
    ZeroInterval,
    #[error("time went backwards: advance({requested}) after advance({current})")]
    TimeRegression { current: u64, requested: u64 },
}
