//! Replicated experiment execution. Replications run concurrently with
//! per-replication seeds; results are re-sorted by run id before emission
//! so concurrency never changes output bytes.

use std::sync::OnceLock;

use rayon::prelude::*;

use tensorica::datagen::{MixingModel, SourceDistribution};
use tensorica::diagnostics::RunTrace;
use tensorica::rng::derive_seed;
use tensorica::schedule::{build_schedule, ScheduleParams};
use tensorica::solver::{run, RunConfig};

use crate::config::ExperimentConfig;
use crate::emit;
use crate::error::Result;

/// One finished replication plus its summary statistics.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub run_id: usize,
    pub d: usize,
    pub t_total: usize,
    pub trace: RunTrace,
    /// |tan∠| at the last iterate.
    pub final_error: f64,
    /// Mean |tan∠| over the final-window records.
    pub window_mean_error: f64,
}

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Ok(n) = std::env::var("TENSORICA_WORKERS") {
            if let Ok(n) = n.parse::<usize>() {
                builder = builder.num_threads(n.max(1));
            }
        }
        builder.build().expect("worker pool")
    })
}

/// Execute all replications for one (d, T) point. Each replication draws a
/// fresh Haar mixing matrix and a fresh uniform initialization from seeds
/// derived from (base seed, point, replication).
#[allow(clippy::too_many_arguments)]
pub fn run_point(
    d: usize,
    t_total: usize,
    distribution: &str,
    schedule_kind: &str,
    replications: usize,
    base_seed: u64,
    record_stride: usize,
    final_window: f64,
    point_index: usize,
) -> Result<Vec<RunOutcome>> {
    let source = SourceDistribution::from_name(distribution)?;
    let params = ScheduleParams {
        t_total,
        d,
        mu4: source.mu4,
        b: source.sub_gaussian_b,
    };
    // fail before spawning work if the schedule is infeasible at this point
    build_schedule(schedule_kind, &params)?;

    let point_seed = derive_seed(base_seed, 0x706F_696E74 ^ point_index as u64);
    let outcomes: Vec<Result<RunOutcome>> = pool().install(|| {
        (0..replications)
            .into_par_iter()
            .map(|rep| {
                let rep_seed = derive_seed(point_seed, rep as u64);
                let source = SourceDistribution::from_name(distribution)?;
                let model = MixingModel::haar(d, derive_seed(rep_seed, 0xA), source)?;
                let schedule = build_schedule(schedule_kind, &params)?;
                let mut cfg = RunConfig::new(t_total, derive_seed(rep_seed, 0xB));
                if record_stride > 0 {
                    cfg.record_stride = Some(record_stride);
                }
                let trace = run(&model, schedule.as_ref(), &cfg)?;
                Ok(RunOutcome {
                    run_id: rep,
                    d,
                    t_total,
                    final_error: trace.final_error(),
                    window_mean_error: trace.window_mean_error(final_window),
                    trace,
                })
            })
            .collect()
    });
    let mut outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    outcomes.sort_by_key(|o| o.run_id);
    Ok(outcomes)
}

/// Run a single-point experiment: one trace CSV per replication plus a
/// summary CSV. Non-convergence is data, not an error.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunOutcome>> {
    config.validate()?;
    let (d, t_total) = (config.d[0], config.t[0]);
    let outcomes = run_point(
        d,
        t_total,
        &config.distribution,
        &config.schedule,
        config.replications,
        config.seed,
        config.record_stride,
        config.final_window,
        0,
    )?;
    std::fs::create_dir_all(&config.output_dir)?;
    for outcome in &outcomes {
        let path = config
            .output_dir
            .join(format!("{}_rep{}.csv", config.name, outcome.run_id));
        emit::write_trace_csv(&path, outcome.run_id, &outcome.trace)?;
    }
    let summary_path = config.output_dir.join(format!("{}_summary.csv", config.name));
    emit::write_summary_csv(&summary_path, &outcomes)?;
    Ok(outcomes)
}
