use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use tensorica::mathkit;
use tensorica_harness::{config::ExperimentConfig, emit, runner, scaling, validate};

#[derive(Parser)]
#[command(
    name = "tensorica",
    about = "Online tensorial ICA experiments: streaming sphere-projected SGD, \
             scaling sweeps and validation suites"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Args)]
struct ConfigOverrides {
    /// Structured key-value config file; flags override config keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    name: Option<String>,
    /// Dimension(s), comma-separated.
    #[arg(long)]
    d: Option<String>,
    /// Sample size(s), comma-separated.
    #[arg(long = "T", alias = "t")]
    t: Option<String>,
    /// mixture-gaussian | gaussian-bernoulli
    #[arg(long)]
    distribution: Option<String>,
    /// constant-warm | constant-uniform | two-phase | two-phase-practical | fixed:<eta>
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Record every N iterations (0 = auto).
    #[arg(long)]
    stride: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Final-window fraction for summary errors.
    #[arg(long)]
    window: Option<f64>,
}

impl ConfigOverrides {
    fn resolve(&self) -> tensorica_harness::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = &self.name {
            cfg.name = v.clone();
        }
        if let Some(v) = &self.d {
            cfg.d = parse_list(v, "d")?;
        }
        if let Some(v) = &self.t {
            cfg.t = parse_list(v, "T")?;
        }
        if let Some(v) = &self.distribution {
            cfg.distribution = v.clone();
        }
        if let Some(v) = &self.schedule {
            cfg.schedule = v.clone();
        }
        if let Some(v) = self.replications {
            cfg.replications = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.stride {
            cfg.record_stride = v;
        }
        if let Some(v) = &self.out {
            cfg.output_dir = v.clone();
        }
        if let Some(v) = self.window {
            cfg.final_window = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_list(value: &str, key: &str) -> tensorica_harness::Result<Vec<usize>> {
    value
        .split(',')
        .map(|s| {
            s.trim().parse::<usize>().map_err(|_| {
                tensorica_harness::Error::Config(format!("invalid {key} entry {:?}", s.trim()))
            })
        })
        .collect()
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment point with replications; emits trace and summary CSVs.
    Simulate(ConfigOverrides),
    /// Sweep d or T and fit the log-log slope of the final-window error.
    Scaling {
        #[command(flatten)]
        overrides: ConfigOverrides,
        /// Sweep axis when no list is given: "d" or "T".
        #[arg(long)]
        axis: Option<String>,
        /// Restrict the slope fit to points with d^4/T below this bound.
        #[arg(long)]
        regime_threshold: Option<f64>,
    },
    /// Run the full structural property suite (pass/fail per property).
    Validate,
    /// Estimate the Orlicz psi_2 norm and sub-Gaussian B of a source.
    Psi2 {
        /// mixture-gaussian | gaussian-bernoulli | normal
        #[arg(long, default_value = "gaussian-bernoulli")]
        distribution: String,
        #[arg(long, default_value_t = mathkit::PSI2_DEFAULT_N)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Order-statistic spacing experiment for uniform initialization.
    Spacing {
        #[arg(long, default_value_t = 50)]
        d: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> tensorica_harness::Result<ExitCode> {
    match cli.command {
        Command::Simulate(overrides) => {
            let cfg = overrides.resolve()?;
            for &d in &cfg.d {
                for &t in &cfg.t {
                    if let Some(msg) = scaling::regime_warning(d, t) {
                        if !cli.quiet {
                            eprintln!("warning: {msg}");
                        }
                    }
                }
            }
            let outcomes = runner::run_experiment(&cfg)?;
            if !cli.quiet {
                for o in &outcomes {
                    println!(
                        "run {}: final_error = {:.6}, window_mean_error = {:.6}",
                        o.run_id, o.final_error, o.window_mean_error
                    );
                }
                println!("wrote {} trace file(s) to {}", outcomes.len(), cfg.output_dir.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Scaling {
            overrides,
            axis,
            regime_threshold,
        } => {
            let mut cfg = overrides.resolve()?;
            // apply sweep defaults when the chosen axis is not already a list
            match axis.as_deref() {
                Some("T") if cfg.t.len() == 1 && overrides_t_missing(&overrides) => {
                    cfg.t = vec![10_000, 50_000, 200_000, 1_000_000];
                }
                Some("d") if cfg.d.len() == 1 && overrides_d_missing(&overrides) => {
                    cfg.d = vec![7, 12, 20, 33, 54];
                }
                Some("T") | Some("d") | None => {}
                Some(other) => {
                    return Err(tensorica_harness::Error::Config(format!(
                        "unknown axis {other:?} (expected d or T)"
                    )));
                }
            }
            cfg.validate()?;
            if let Some(bound) = regime_threshold {
                restrict_to_regime(&mut cfg, bound, cli.quiet)?;
            }
            let summary = scaling::scaling_sweep(&cfg, cli.quiet)?;
            std::fs::create_dir_all(&cfg.output_dir)?;
            let path = cfg.output_dir.join(format!("{}_scaling.csv", cfg.name));
            emit::write_scaling_csv(&path, &summary)?;
            println!(
                "axis = {}, fitted_slope = {:.4}, slope_stderr = {:.4}",
                summary.axis, summary.fitted_slope, summary.slope_stderr
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate => {
            if validate::run_validation(cli.quiet) {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(4))
            }
        }
        Command::Psi2 {
            distribution,
            n,
            seed,
        } => {
            let (k_hat, b) = match distribution.as_str() {
                "normal" => {
                    let mut sampler = |rng: &mut rand_chacha::ChaCha8Rng| {
                        use rand::Rng;
                        rng.sample::<f64, _>(rand_distr::StandardNormal)
                    };
                    let est = mathkit::estimate_psi_alpha_norm(
                        &mut sampler,
                        2.0,
                        n,
                        seed,
                        mathkit::PSI2_DEFAULT_TOL,
                    )?;
                    (est.k_hat, est.k_hat * (8.0f64 / 3.0).sqrt())
                }
                name => {
                    let dist = tensorica::SourceDistribution::from_name(name)?;
                    let b = mathkit::sub_gaussian_b(&dist, n, seed)?;
                    (b / (8.0f64 / 3.0).sqrt(), b)
                }
            };
            println!("psi2_norm = {k_hat}");
            println!("sub_gaussian_B = {b}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Spacing {
            d,
            epsilon,
            trials,
            seed,
        } => {
            let out = mathkit::spacing_experiment(d, epsilon, trials, seed)?;
            println!("threshold = {}", out.threshold);
            println!("empirical_prob = {}", out.empirical_prob);
            println!("lower_bound = {}", 1.0 - 3.0 * epsilon);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn overrides_t_missing(o: &ConfigOverrides) -> bool {
    o.t.is_none() && o.config.is_none()
}

fn overrides_d_missing(o: &ConfigOverrides) -> bool {
    o.d.is_none() && o.config.is_none()
}

/// Drop sweep points outside d^4/T <= bound from the run entirely (the
/// remaining points still need >= 3 for a fit).
fn restrict_to_regime(
    cfg: &mut ExperimentConfig,
    bound: f64,
    quiet: bool,
) -> tensorica_harness::Result<()> {
    let keep = |d: usize, t: usize| (d as f64).powi(4) / t as f64 <= bound;
    if cfg.d.len() > 1 {
        let t = cfg.t[0];
        cfg.d.retain(|&d| {
            let ok = keep(d, t);
            if !ok && !quiet {
                eprintln!("excluding d = {d} (d^4/T > {bound})");
            }
            ok
        });
    } else {
        let d = cfg.d[0];
        cfg.t.retain(|&t| {
            let ok = keep(d, t);
            if !ok && !quiet {
                eprintln!("excluding T = {t} (d^4/T > {bound})");
            }
            ok
        });
    }
    cfg.validate()
}
