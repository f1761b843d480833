//! Supporting numerical machinery, made executable: the reversed
//! discrete Gronwall inequality, Orlicz ψ_α-norm estimation, sub-Gaussian
//! parameter recovery, and the order-statistic spacing experiment for
//! uniformly initialized iterates.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::datagen::SourceDistribution;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

/// A concrete instance of the reversed Gronwall hypothesis:
/// |u(t) − u(0) + Σ_{s<t} β(s)u(s)| ≤ α for all t ≤ T.
#[derive(Clone, Debug)]
pub struct GronwallInstance {
    /// u(0..T), length T+1.
    pub u: Vec<f64>,
    /// β(0..T−1), each in [0, 1).
    pub beta: Vec<f64>,
    pub alpha: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct GronwallReport {
    pub holds: bool,
    /// max over t of |u(t) − u(0)∏(1−β)| − 2α; negative when the
    /// conclusion holds with room.
    pub max_slack: f64,
}

/// Verify the conclusion |u(t) − u(0)·∏_{s<t}(1−β(s))| ≤ 2α − α∏(1−β(s))
/// for every t. The hypothesis is checked first and its failure is
/// reported separately from a failure of the conclusion.
pub fn gronwall_check(inst: &GronwallInstance) -> Result<GronwallReport> {
    let t_max = inst.beta.len();
    if inst.u.len() != t_max + 1 {
        return Err(Error::InvalidInstance(format!(
            "u has length {}, expected beta length + 1 = {}",
            inst.u.len(),
            t_max + 1
        )));
    }
    if inst.alpha < 0.0 {
        return Err(Error::InvalidInstance("alpha must be nonnegative".into()));
    }
    for (s, &b) in inst.beta.iter().enumerate() {
        if !(0.0..1.0).contains(&b) {
            return Err(Error::InvalidInstance(format!(
                "beta({s}) = {b} outside [0, 1)"
            )));
        }
    }

    let rounding = 1e-12 * inst.u[0].abs().max(1.0);

    // hypothesis: checked, not assumed
    let mut weighted_sum = 0.0;
    for t in 1..=t_max {
        weighted_sum += inst.beta[t - 1] * inst.u[t - 1];
        let lhs = (inst.u[t] - inst.u[0] + weighted_sum).abs();
        if lhs > inst.alpha + rounding {
            return Err(Error::HypothesisViolated(format!(
                "|u({t}) - u(0) + sum| = {lhs:e} > alpha = {:e}",
                inst.alpha
            )));
        }
    }

    let mut product = 1.0;
    let mut holds = true;
    let mut max_slack = f64::NEG_INFINITY;
    for t in 1..=t_max {
        product *= 1.0 - inst.beta[t - 1];
        let lhs = (inst.u[t] - inst.u[0] * product).abs();
        let bound = 2.0 * inst.alpha - inst.alpha * product;
        if lhs > bound + rounding {
            holds = false;
        }
        max_slack = max_slack.max(lhs - 2.0 * inst.alpha);
    }
    Ok(GronwallReport { holds, max_slack })
}

/// Generate a random instance that satisfies the hypothesis exactly, by
/// choosing the partial-sum targets in [−α, α] and solving for u(t).
pub fn random_gronwall_instance(t_max: usize, rng: &mut ChaCha8Rng) -> GronwallInstance {
    let alpha = rng.random::<f64>() * 2.0;
    let u0 = rng.sample::<f64, _>(StandardNormal) * 3.0;
    let beta: Vec<f64> = (0..t_max).map(|_| rng.random::<f64>() * 0.999).collect();
    let mut u = Vec::with_capacity(t_max + 1);
    u.push(u0);
    let mut weighted_sum = 0.0;
    for t in 1..=t_max {
        weighted_sum += beta[t - 1] * u[t - 1];
        let target = (rng.random::<f64>() * 2.0 - 1.0) * alpha;
        u.push(u0 - weighted_sum + target);
    }
    GronwallInstance { u, beta, alpha }
}

/// Audit the bound on `n` random instances; returns the number of failures
/// (always 0 unless the implementation is broken).
pub fn gronwall_audit(n: usize, t_max: usize, seed: u64) -> Result<usize> {
    let mut rng = rng_from_seed(seed);
    let mut failures = 0;
    for _ in 0..n {
        let inst = random_gronwall_instance(t_max, &mut rng);
        if !gronwall_check(&inst)?.holds {
            failures += 1;
        }
    }
    Ok(failures)
}

#[derive(Clone, Copy, Debug)]
pub struct OrliczEstimate {
    pub alpha: f64,
    pub k_hat: f64,
    pub n_samples: usize,
    /// Relative bracket width at termination.
    pub tolerance: f64,
}

const BRACKET_LO: f64 = 1e-6;
const BRACKET_HI: f64 = 1e6;

/// Estimate the ψ_α-norm inf{K : E exp(|X/K|^α) ≤ 2} by bisection over a
/// fixed Monte-Carlo sample (common random numbers keep the objective
/// monotone in K).
pub fn estimate_psi_alpha_norm(
    sampler: &mut dyn FnMut(&mut ChaCha8Rng) -> f64,
    alpha: f64,
    n: usize,
    seed: u64,
    tol_rel: f64,
) -> Result<OrliczEstimate> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::InvalidSampler(format!(
            "psi index alpha must be positive, got {alpha}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut abs_samples = Vec::with_capacity(n);
    for _ in 0..n {
        let x = sampler(&mut rng);
        if !x.is_finite() {
            return Err(Error::InvalidSampler(format!(
                "sampler produced non-finite value {x}"
            )));
        }
        abs_samples.push(x.abs());
    }
    // mean of exp((|x|/K)^alpha); +inf on overflow, which is fine for the
    // bracket test since it only pushes K upward
    let moment = |k: f64| {
        abs_samples
            .iter()
            .map(|&a| ((a / k).powf(alpha)).exp())
            .sum::<f64>()
            / n as f64
    };
    if moment(BRACKET_LO) <= 2.0 {
        // essentially zero variable; norm collapses to the lower bracket
        return Ok(OrliczEstimate {
            alpha,
            k_hat: BRACKET_LO,
            n_samples: n,
            tolerance: 0.0,
        });
    }
    if moment(BRACKET_HI) > 2.0 {
        return Err(Error::EstimateFailed(format!(
            "no bracket within [{BRACKET_LO:e}, {BRACKET_HI:e}]"
        )));
    }
    let mut lo = BRACKET_LO;
    let mut hi = BRACKET_HI;
    while (hi - lo) / lo > tol_rel {
        let mid = 0.5 * (lo + hi);
        if moment(mid) > 2.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(OrliczEstimate {
        alpha,
        k_hat: 0.5 * (lo + hi),
        n_samples: n,
        tolerance: (hi - lo) / lo,
    })
}

/// Default Monte-Carlo size for ψ₂ estimates; the exp(X²) integrand is
/// heavy-tailed and needs a large sample.
pub const PSI2_DEFAULT_N: usize = 1_000_000;
pub const PSI2_DEFAULT_TOL: f64 = 1e-3;

/// Recover the sub-Gaussian bound B of a source from its ψ₂ norm, inverting
/// the √(3/8)·B convention.
pub fn sub_gaussian_b(dist: &SourceDistribution, n: usize, seed: u64) -> Result<f64> {
    let d = dist.clone();
    let mut sampler = move |rng: &mut ChaCha8Rng| d.sample_one(rng);
    let est = estimate_psi_alpha_norm(&mut sampler, 2.0, n, seed, PSI2_DEFAULT_TOL)?;
    Ok(est.k_hat * (8.0f64 / 3.0).sqrt())
}

#[derive(Clone, Copy, Debug)]
pub struct SpacingOutcome {
    /// Fraction of trials with min_k W_k⁽⁰⁾ ≥ ε/(8·log ε⁻¹·log d).
    pub empirical_prob: f64,
    pub threshold: f64,
    pub n_trials: usize,
}

/// Monte-Carlo check of the initialization spacing bound: for uniform
/// sphere points with the largest squared coordinate relabelled first,
/// min_k W_k⁽⁰⁾ stays above the threshold with probability ≥ 1 − 3ε.
pub fn spacing_experiment(
    d: usize,
    epsilon: f64,
    n_trials: usize,
    seed: u64,
) -> Result<SpacingOutcome> {
    if !(epsilon > 0.0 && epsilon < 1.0 / 3.0) {
        return Err(Error::InfeasibleDimension(format!(
            "epsilon must lie in (0, 1/3), got {epsilon}"
        )));
    }
    let dim_floor = 2.0 * (2.0 * std::f64::consts::PI * std::f64::consts::E).sqrt()
        * (1.0 / epsilon).ln()
        + 1.0;
    if (d as f64) < dim_floor {
        return Err(Error::InfeasibleDimension(format!(
            "d = {d} below 2*sqrt(2*pi*e)*log(1/eps) + 1 = {dim_floor:.2}"
        )));
    }
    let threshold = epsilon / (8.0 * (1.0 / epsilon).ln() * (d as f64).ln());
    let mut hits = 0usize;
    for trial in 0..n_trials {
        let mut rng = rng_from_seed(derive_seed(seed, trial as u64));
        let mut sq: Vec<f64> = (0..d)
            .map(|_| {
                let g: f64 = rng.sample(StandardNormal);
                g * g
            })
            .collect();
        let total: f64 = sq.iter().sum();
        for v in &mut sq {
            *v /= total;
        }
        // relabel so coordinate 1 carries the largest square
        let (imax, _) = sq
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        sq.swap(0, imax);
        let v1 = sq[0];
        let min_w = sq[1..]
            .iter()
            .map(|&vk| (v1 - vk) / vk)
            .fold(f64::INFINITY, f64::min);
        if min_w >= threshold {
            hits += 1;
        }
    }
    Ok(SpacingOutcome {
        empirical_prob: hits as f64 / n_trials as f64,
        threshold,
        n_trials,
    })
}
