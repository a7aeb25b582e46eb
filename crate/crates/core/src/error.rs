use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("kernel covariance calibration failed: {degenerate} of {total} simulated summaries were degenerate")]
    Calibration { degenerate: usize, total: usize },

    #[error("all particle weights are zero at stage {stage} (epsilon = {epsilon})")]
    Collapse { stage: usize, epsilon: f64 },

    #[error("stage {stage} aborted: {attempts} consecutive zero-weight proposals for slot {slot} (epsilon = {epsilon})")]
    StageAbort {
        stage: usize,
        slot: usize,
        attempts: usize,
        epsilon: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
