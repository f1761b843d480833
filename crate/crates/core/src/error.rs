use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("degenerate vector: pre-projection norm vanished{}",
            .iteration.map(|t| format!(" at iteration {t}")).unwrap_or_default())]
    DegenerateVector { iteration: Option<usize> },

    #[error("schedule infeasible: {0}")]
    ScheduleInfeasible(String),

    #[error("unknown schedule kind {0:?} (known: {1})")]
    UnknownSchedule(String, String),

    #[error("component index {index} out of range [1, {d}]")]
    IndexOutOfRange { index: usize, d: usize },

    #[error("infeasible dimension: {0}")]
    InfeasibleDimension(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("invalid sampler: {0}")]
    InvalidSampler(String),

    #[error("estimate failed: {0}")]
    EstimateFailed(String),
}
