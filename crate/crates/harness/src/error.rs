use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] tensorica::Error),

    #[error("fit failed: {0}")]
    FitFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 1 usage, 2 infeasible config, 3 runtime error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Core(tensorica::Error::ScheduleInfeasible(_))
            | Error::Core(tensorica::Error::InfeasibleDimension(_))
            | Error::Core(tensorica::Error::InvalidDimension(_))
            | Error::Core(tensorica::Error::InvalidDistribution(_))
            | Error::Core(tensorica::Error::UnknownSchedule(_, _)) => 2,
            _ => 3,
        }
    }
}
