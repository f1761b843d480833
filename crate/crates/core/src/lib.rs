//! Online tensorial ICA: a streaming solver for recovering one independent
//! component of a whitened mixture X = AZ by projected stochastic gradient
//! ascent of the kurtosis contrast ±E(uᵀX)⁴ on the unit sphere, together
//! with the diagnostic and numerical machinery used to validate it.

pub mod datagen;
pub mod diagnostics;
pub mod error;
pub mod mathkit;
pub mod rng;
pub mod schedule;
pub mod solver;

pub use datagen::{MixingModel, ObservationStream, SourceDistribution};
pub use diagnostics::RunTrace;
pub use error::{Error, Result};
pub use schedule::{build_schedule, ScheduleParams, StepsizeSchedule};
pub use solver::{InitMode, RunConfig, SolverState, UnitVector};
