//! Stepsize schedules behind a common trait, registered by name and
//! selected at runtime from config or the CLI.
//!
//! All constants come from the finite-sample analysis: the warm-start
//! constant schedule, the uniform-init constant schedule, the two-phase
//! schedule (large stepsize for the first half, small for the second), and
//! its practical variant with the logarithmic factors dropped.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleParams {
    /// Planned total sample size T.
    pub t_total: usize,
    pub d: usize,
    pub mu4: f64,
    /// Sub-Gaussian bound B of the source.
    pub b: f64,
}

impl ScheduleParams {
    fn excess(&self) -> Result<f64> {
        let m = (self.mu4 - 3.0).abs();
        if m <= 0.0 {
            return Err(Error::ScheduleInfeasible(
                "|mu4 - 3| = 0: zero excess kurtosis admits no stepsize".into(),
            ));
        }
        Ok(m)
    }
}

pub trait StepsizeSchedule: Send + Sync {
    fn kind(&self) -> &'static str;
    /// Planned horizon T.
    fn horizon(&self) -> usize;
    /// Stepsize for iteration t (1-based, t ≤ T). Always positive.
    fn stepsize_at(&self, t: usize) -> f64;
    /// Phase label for iteration t; 1 for single-phase schedules.
    fn phase_of(&self, _t: usize) -> u8 {
        1
    }
}

/// Constant stepsize for warm starts: 9·log(2(μ₄−3)²T/(9B⁸)) / (2|μ₄−3|T).
struct ConstantWarm {
    t_total: usize,
    eta: f64,
}

/// Constant stepsize for uniform initialization:
/// 4d·log((μ₄−3)²T/(4B⁸d)) / (|μ₄−3|T).
struct ConstantUniform {
    t_total: usize,
    eta: f64,
}

/// η₁ = 8d·log((μ₄−3)²T/(8B⁸d))/(|μ₄−3|T) for t ≤ T/2, then
/// η₂ = 9·log((μ₄−3)²T/(9B⁸))/(|μ₄−3|T).
struct TwoPhase {
    t_total: usize,
    eta1: f64,
    eta2: f64,
}

/// Two-phase with the log factors dropped: 8d/(|μ₄−3|T) then 9/(|μ₄−3|T).
struct TwoPhasePractical {
    t_total: usize,
    eta1: f64,
    eta2: f64,
}

/// User-supplied constant stepsize.
struct Fixed {
    t_total: usize,
    eta: f64,
}

impl StepsizeSchedule for ConstantWarm {
    fn kind(&self) -> &'static str {
        "constant-warm"
    }
    fn horizon(&self) -> usize {
        self.t_total
    }
    fn stepsize_at(&self, _t: usize) -> f64 {
        self.eta
    }
}

impl StepsizeSchedule for ConstantUniform {
    fn kind(&self) -> &'static str {
        "constant-uniform"
    }
    fn horizon(&self) -> usize {
        self.t_total
    }
    fn stepsize_at(&self, _t: usize) -> f64 {
        self.eta
    }
}

impl StepsizeSchedule for TwoPhase {
    fn kind(&self) -> &'static str {
        "two-phase"
    }
    fn horizon(&self) -> usize {
        self.t_total
    }
    fn stepsize_at(&self, t: usize) -> f64 {
        if t <= self.t_total / 2 {
            self.eta1
        } else {
            self.eta2
        }
    }
    fn phase_of(&self, t: usize) -> u8 {
        if t <= self.t_total / 2 {
            1
        } else {
            2
        }
    }
}

impl StepsizeSchedule for TwoPhasePractical {
    fn kind(&self) -> &'static str {
        "two-phase-practical"
    }
    fn horizon(&self) -> usize {
        self.t_total
    }
    fn stepsize_at(&self, t: usize) -> f64 {
        if t <= self.t_total / 2 {
            self.eta1
        } else {
            self.eta2
        }
    }
    fn phase_of(&self, t: usize) -> u8 {
        if t <= self.t_total / 2 {
            1
        } else {
            2
        }
    }
}

impl StepsizeSchedule for Fixed {
    fn kind(&self) -> &'static str {
        "fixed"
    }
    fn horizon(&self) -> usize {
        self.t_total
    }
    fn stepsize_at(&self, _t: usize) -> f64 {
        self.eta
    }
}

fn log_factor(arg: f64, condition: &str) -> Result<f64> {
    if arg <= 1.0 {
        return Err(Error::ScheduleInfeasible(format!(
            "log argument {arg:.6e} <= 1; requires {condition}"
        )));
    }
    Ok(arg.ln())
}

fn build_constant_warm(p: &ScheduleParams) -> Result<Box<dyn StepsizeSchedule>> {
    let m = p.excess()?;
    let t = p.t_total as f64;
    let b8 = p.b.powi(8);
    let log = log_factor(2.0 * m * m * t / (9.0 * b8), "2(mu4-3)^2 T > 9 B^8")?;
    Ok(Box::new(ConstantWarm {
        t_total: p.t_total,
        eta: 9.0 * log / (2.0 * m * t),
    }))
}

fn build_constant_uniform(p: &ScheduleParams) -> Result<Box<dyn StepsizeSchedule>> {
    let m = p.excess()?;
    let (t, d) = (p.t_total as f64, p.d as f64);
    let b8 = p.b.powi(8);
    let log = log_factor(m * m * t / (4.0 * b8 * d), "(mu4-3)^2 T > 4 B^8 d")?;
    Ok(Box::new(ConstantUniform {
        t_total: p.t_total,
        eta: 4.0 * d * log / (m * t),
    }))
}

fn build_two_phase(p: &ScheduleParams) -> Result<Box<dyn StepsizeSchedule>> {
    let m = p.excess()?;
    let (t, d) = (p.t_total as f64, p.d as f64);
    let b8 = p.b.powi(8);
    let log1 = log_factor(m * m * t / (8.0 * b8 * d), "(mu4-3)^2 T > 8 B^8 d")?;
    let log2 = log_factor(m * m * t / (9.0 * b8), "(mu4-3)^2 T > 9 B^8")?;
    Ok(Box::new(TwoPhase {
        t_total: p.t_total,
        eta1: 8.0 * d * log1 / (m * t),
        eta2: 9.0 * log2 / (m * t),
    }))
}

fn build_two_phase_practical(p: &ScheduleParams) -> Result<Box<dyn StepsizeSchedule>> {
    let m = p.excess()?;
    let (t, d) = (p.t_total as f64, p.d as f64);
    Ok(Box::new(TwoPhasePractical {
        t_total: p.t_total,
        eta1: 8.0 * d / (m * t),
        eta2: 9.0 / (m * t),
    }))
}

type BuildFn = fn(&ScheduleParams) -> Result<Box<dyn StepsizeSchedule>>;

pub const SCHEDULE_REGISTRY: &[(&str, BuildFn)] = &[
    ("constant-warm", build_constant_warm),
    ("constant-uniform", build_constant_uniform),
    ("two-phase", build_two_phase),
    ("two-phase-practical", build_two_phase_practical),
];

pub fn schedule_kinds() -> String {
    let mut kinds: Vec<&str> = SCHEDULE_REGISTRY.iter().map(|(n, _)| *n).collect();
    kinds.push("fixed:<eta>");
    kinds.join(", ")
}

/// Build a schedule by registered name. `fixed:<eta>` selects a constant
/// user-supplied stepsize.
pub fn build_schedule(kind: &str, params: &ScheduleParams) -> Result<Box<dyn StepsizeSchedule>> {
    if params.t_total < 1 {
        return Err(Error::ScheduleInfeasible("T must be at least 1".into()));
    }
    if let Some(rest) = kind.strip_prefix("fixed:") {
        let eta: f64 = rest
            .parse()
            .map_err(|_| Error::UnknownSchedule(kind.to_string(), schedule_kinds()))?;
        if eta < 0.0 {
            return Err(Error::ScheduleInfeasible(format!(
                "fixed stepsize must be nonnegative, got {eta}"
            )));
        }
        return Ok(Box::new(Fixed {
            t_total: params.t_total,
            eta,
        }));
    }
    match SCHEDULE_REGISTRY.iter().find(|(n, _)| *n == kind) {
        Some((_, build)) => build(params),
        None => Err(Error::UnknownSchedule(kind.to_string(), schedule_kinds())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(d: usize, t: usize, mu4: f64, b: f64) -> ScheduleParams {
        ScheduleParams {
            t_total: t,
            d,
            mu4,
            b,
        }
    }

    #[test]
    fn practical_values_match_closed_form() {
        // |mu4-3| = 3, d = 20, T = 1e6: eta1 = 8*20/(3e6), eta2 = 9/(3e6).
        let s = build_schedule("two-phase-practical", &params(20, 1_000_000, 6.0, 2.0)).unwrap();
        assert!((s.stepsize_at(1) - 160.0 / 3e6).abs() < 1e-18);
        assert!((s.stepsize_at(1_000_000) - 3e-6).abs() < 1e-18);
    }

    #[test]
    fn two_phase_boundary_contract() {
        let t = 1_000_000;
        let s = build_schedule("two-phase", &params(20, t, 6.0, 1.5)).unwrap();
        let e1 = s.stepsize_at(t / 2);
        let e2 = s.stepsize_at(t / 2 + 1);
        assert_ne!(e1, e2);
        assert_eq!(s.phase_of(t / 2), 1);
        assert_eq!(s.phase_of(t / 2 + 1), 2);
        // constant within each phase
        assert_eq!(s.stepsize_at(1), e1);
        assert_eq!(s.stepsize_at(t), e2);
        assert!(e1 > 0.0 && e2 > 0.0);
    }

    #[test]
    fn constant_warm_formula() {
        let p = params(20, 1_000_000, 6.0, 1.5);
        let s = build_schedule("constant-warm", &p).unwrap();
        let m = 3.0f64;
        let expect =
            9.0 * (2.0 * m * m * 1e6 / (9.0 * 1.5f64.powi(8))).ln() / (2.0 * m * 1e6);
        assert!((s.stepsize_at(1) - expect).abs() < 1e-18);
    }

    #[test]
    fn constant_uniform_formula() {
        let p = params(20, 1_000_000, 6.0, 1.5);
        let s = build_schedule("constant-uniform", &p).unwrap();
        let m = 3.0f64;
        let expect =
            4.0 * 20.0 * (m * m * 1e6 / (4.0 * 1.5f64.powi(8) * 20.0)).ln() / (m * 1e6);
        assert!((s.stepsize_at(7) - expect).abs() < 1e-18);
    }

    #[test]
    fn infeasible_names_condition() {
        // tiny T makes every log argument <= 1
        let err = match build_schedule("two-phase", &params(20, 10, 6.0, 10.0)) {
            Ok(_) => panic!("expected infeasible schedule"),
            Err(e) => e,
        };
        match err {
            Error::ScheduleInfeasible(msg) => assert!(msg.contains("B^8"), "{msg}"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unknown_kind_lists_registry() {
        let err = match build_schedule("adagrad", &params(2, 100, 6.0, 1.0)) {
            Ok(_) => panic!("expected unknown schedule"),
            Err(e) => e,
        };
        assert!(matches!(err, Error::UnknownSchedule(_, _)));
    }

    #[test]
    fn fixed_schedule_parses_eta() {
        let s = build_schedule("fixed:0.01", &params(2, 100, 6.0, 1.0)).unwrap();
        assert_eq!(s.stepsize_at(50), 0.01);
        assert_eq!(s.kind(), "fixed");
    }
}
