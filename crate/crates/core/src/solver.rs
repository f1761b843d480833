//! The sphere-projected stochastic update for one independent component:
//! u' = Π₁[u + η·sign(μ₄−3)·(uᵀx)³x], plus initialization and the runner
//! that consumes a stream for T iterations under a stepsize schedule.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::datagen::{MixingModel, ObservationStream};
use crate::diagnostics::{closest_component, RunTrace, TraceRecord};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::schedule::StepsizeSchedule;

/// Point on the unit sphere; every constructor normalizes and the norm is
/// kept within 1e-12 of one.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector(DVector<f64>);

impl UnitVector {
    /// Π₁: project a nonzero vector onto the sphere. Idempotent on unit
    /// vectors; a vanishing norm is an error, never renormalized from zero.
    pub fn project(w: &DVector<f64>) -> Result<Self> {
        let norm = w.norm();
        if norm.is_nan() || norm <= 1e-300 {
            return Err(Error::DegenerateVector { iteration: None });
        }
        Ok(Self(w / norm))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }

    pub fn dot(&self, other: &DVector<f64>) -> f64 {
        self.0.dot(other)
    }
}

/// Uniform draw from the sphere: normalized i.i.d. standard Gaussians.
pub fn init_uniform(d: usize, seed: u64) -> Result<UnitVector> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let mut rng = rng_from_seed(seed);
    Ok(init_uniform_using(d, &mut rng))
}

pub fn init_uniform_using(d: usize, rng: &mut ChaCha8Rng) -> UnitVector {
    loop {
        let chi = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        if let Ok(u) = UnitVector::project(&chi) {
            return u;
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverState {
    pub u: UnitVector,
    /// Number of observations consumed.
    pub t: usize,
    /// sign(μ₄ − 3): ascent for leptokurtic sources, descent otherwise.
    pub kurtosis_sign: f64,
}

impl SolverState {
    pub fn new(u: UnitVector, kurtosis_sign: f64) -> Self {
        Self {
            u,
            t: 0,
            kurtosis_sign,
        }
    }
}

/// One stochastic update. The pre-projection vector can vanish only if the
/// gradient term exactly cancels u, which surfaces as an error with the
/// iteration index attached.
pub fn sgd_step(state: &mut SolverState, x: &DVector<f64>, eta: f64) -> Result<()> {
    let dot = state.u.dot(x);
    let w = state.u.as_vector() + (eta * state.kurtosis_sign * dot.powi(3)) * x;
    state.u = UnitVector::project(&w).map_err(|_| Error::DegenerateVector {
        iteration: Some(state.t + 1),
    })?;
    state.t += 1;
    Ok(())
}

#[derive(Clone, Debug)]
pub enum InitMode {
    /// Uniform on the sphere from the run's derived init seed.
    Uniform,
    /// Warm start from a given point.
    Given(UnitVector),
}

#[derive(Clone, Debug)]
pub enum KurtosisSign {
    /// Taken from the model's known μ₄.
    FromModel,
    /// Estimated from a warm-up prefix of observations (separate stream so
    /// the T training observations are untouched).
    Estimate { warmup: usize },
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub t_total: usize,
    pub seed: u64,
    /// Record every `stride` iterations; `None` means max(1, T/2000).
    pub record_stride: Option<usize>,
    /// Also store full iterate snapshots in the trace.
    pub record_snapshots: bool,
    pub init: InitMode,
    pub kurtosis_sign: KurtosisSign,
}

impl RunConfig {
    pub fn new(t_total: usize, seed: u64) -> Self {
        Self {
            t_total,
            seed,
            record_stride: None,
            record_snapshots: false,
            init: InitMode::Uniform,
            kurtosis_sign: KurtosisSign::FromModel,
        }
    }
}

/// Empirical excess-kurtosis sign from coordinate fourth moments of X.
/// For whitened X = AZ, E[X_k⁴] − 3 = (μ₄−3)·Σ_i A_ki⁴ shares the sign of
/// μ₄ − 3 for every k.
pub fn estimate_kurtosis_sign(model: &MixingModel, n: usize, seed: u64) -> f64 {
    let mut stream = ObservationStream::new(model, seed);
    let d = model.dimension();
    let mut acc = 0.0;
    for _ in 0..n {
        let x = stream.next_observation();
        for k in 0..d {
            acc += x[k].powi(4) - 3.0;
        }
    }
    if acc >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Run the solver for exactly T observations, recording tan-angle
/// diagnostics at the configured stride (the final iterate is always
/// recorded). Deterministic per (model, schedule, config.seed).
pub fn run(
    model: &MixingModel,
    schedule: &dyn StepsizeSchedule,
    cfg: &RunConfig,
) -> Result<RunTrace> {
    let t_total = cfg.t_total;
    if t_total < 1 {
        return Err(Error::ScheduleInfeasible("T must be at least 1".into()));
    }
    let stride = cfg
        .record_stride
        .unwrap_or_else(|| (t_total / 2000).max(1))
        .max(1);

    let stream_seed = derive_seed(cfg.seed, 0);
    let init_seed = derive_seed(cfg.seed, 1);
    let warmup_seed = derive_seed(cfg.seed, 2);

    let sign = match cfg.kurtosis_sign {
        KurtosisSign::FromModel => (model.source().mu4 - 3.0).signum(),
        KurtosisSign::Estimate { warmup } => estimate_kurtosis_sign(model, warmup, warmup_seed),
    };

    let u0 = match &cfg.init {
        InitMode::Uniform => init_uniform(model.dimension(), init_seed)?,
        InitMode::Given(u) => u.clone(),
    };

    let mut state = SolverState::new(u0, sign);
    let mut stream = ObservationStream::new(model, stream_seed);
    let mut records = Vec::with_capacity(t_total / stride + 2);

    let record = |state: &SolverState, phase: u8, records: &mut Vec<TraceRecord>| {
        let closest = closest_component(&state.u, model);
        records.push(TraceRecord {
            t: state.t,
            tan_angle_min: closest.tan_abs,
            component_index: closest.index,
            phase,
            u_snapshot: cfg
                .record_snapshots
                .then(|| state.u.as_vector().iter().copied().collect()),
        });
    };

    record(&state, schedule.phase_of(1), &mut records);
    for t in 1..=t_total {
        let x = stream.next_observation();
        let eta = schedule.stepsize_at(t);
        sgd_step(&mut state, &x, eta)?;
        if t % stride == 0 || t == t_total {
            record(&state, schedule.phase_of(t), &mut records);
        }
    }

    Ok(RunTrace {
        records,
        seed: cfg.seed,
        config_fingerprint: trace_fingerprint(model, schedule, cfg),
    })
}

fn trace_fingerprint(
    model: &MixingModel,
    schedule: &dyn StepsizeSchedule,
    cfg: &RunConfig,
) -> u64 {
    let desc = format!(
        "d={};dist={};schedule={};T={};seed={};stride={:?}",
        model.dimension(),
        model.source().name(),
        schedule.kind(),
        cfg.t_total,
        cfg.seed,
        cfg.record_stride,
    );
    crate::rng::fingerprint(desc.as_bytes())
}
