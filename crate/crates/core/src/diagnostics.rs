//! Analysis quantities: tan-angle error, closest component, rotated
//! iterates and their coordinate ratios, region membership, Monte-Carlo
//! objective estimates, and rescaled-time horizons. All functions here are
//! pure and report-only.

use nalgebra::DVector;

use crate::datagen::{MixingModel, ObservationStream};
use crate::error::{Error, Result};
use crate::solver::UnitVector;

/// One diagnostic sample along a run.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub t: usize,
    /// min_i |tan∠(u, a_i)|; +∞ when u is orthogonal to every component.
    pub tan_angle_min: f64,
    /// 1-based index of the closest component.
    pub component_index: usize,
    pub phase: u8,
    pub u_snapshot: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    pub seed: u64,
    pub config_fingerprint: u64,
}

impl RunTrace {
    pub fn final_error(&self) -> f64 {
        self.records.last().map(|r| r.tan_angle_min).unwrap_or(f64::INFINITY)
    }

    /// Mean |tan∠| over the records in the final `window` fraction of the
    /// run, i.e. those with t > (1 − window)·T.
    pub fn window_mean_error(&self, window: f64) -> f64 {
        let t_total = self.records.last().map(|r| r.t).unwrap_or(0);
        let cut = (1.0 - window) * t_total as f64;
        let tail: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.t as f64 > cut)
            .map(|r| r.tan_angle_min)
            .collect();
        if tail.is_empty() {
            return f64::INFINITY;
        }
        tail.iter().sum::<f64>() / tail.len() as f64
    }
}

/// Signed tan of the angle between u and a: √(1−(aᵀu)²)/(aᵀu).
/// Orthogonal inputs give +∞ rather than an error so traces stay total.
pub fn tan_angle(u: &UnitVector, a: &DVector<f64>) -> f64 {
    let dot = u.dot(a);
    if dot == 0.0 {
        return f64::INFINITY;
    }
    (1.0 - dot * dot).max(0.0).sqrt() / dot
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosestComponent {
    /// 1-based component index; ties broken by smallest index.
    pub index: usize,
    pub tan_abs: f64,
}

/// argmin_i tan²∠(u, a_i), equivalently argmax (a_iᵀu)².
pub fn closest_component(u: &UnitVector, model: &MixingModel) -> ClosestComponent {
    let a = model.mixing();
    let mut best = (0usize, -1.0f64);
    for i in 0..model.dimension() {
        let dot = u.as_vector().dot(&a.column(i));
        let sq = dot * dot;
        if sq > best.1 {
            best = (i, sq);
        }
    }
    let dot_sq = best.1.min(1.0);
    let tan_abs = if dot_sq == 0.0 {
        f64::INFINITY
    } else {
        ((1.0 - dot_sq).max(0.0) / dot_sq).sqrt()
    };
    ClosestComponent {
        index: best.0 + 1,
        tan_abs,
    }
}

/// The rotated iterate v = PAᵀu with the selected component swapped into
/// coordinate 1, so tan∠(v, e₁) = tan∠(u, a_I).
#[derive(Clone, Debug, PartialEq)]
pub struct RotatedView {
    pub v: UnitVector,
    /// 1-based coordinate swapped to position 1.
    pub index: usize,
}

pub fn rotate(u: &UnitVector, model: &MixingModel, index: usize) -> Result<RotatedView> {
    let d = model.dimension();
    if index < 1 || index > d {
        return Err(Error::IndexOutOfRange { index, d });
    }
    // per-column dots (not a gemv) so v_k shares the summation order of
    // tan_angle(u, a_k); blocked products differ by ulps that the tangent
    // amplifies near orthogonality
    let a = model.mixing();
    let mut v = DVector::from_fn(d, |k, _| u.as_vector().dot(&a.column(k)));
    v.swap_rows(0, index - 1);
    Ok(RotatedView {
        v: UnitVector::project(&v)?,
        index,
    })
}

/// Coordinate ratios of a rotated iterate, indexed k = 2..d:
/// U_k = v_k/v₁ and W_k = (v₁² − v_k²)/v_k². Zero denominators yield `None`
/// and propagate as empty CSV fields downstream.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordRatios {
    pub u: Vec<Option<f64>>,
    pub w: Vec<Option<f64>>,
}

pub fn coord_ratios(v: &UnitVector) -> CoordRatios {
    let vec = v.as_vector();
    let v1 = vec[0];
    let d = vec.len();
    let mut u = Vec::with_capacity(d - 1);
    let mut w = Vec::with_capacity(d - 1);
    for k in 1..d {
        let vk = vec[k];
        let uk = (v1 != 0.0).then(|| vk / v1);
        // W_k = (v₁² − v_k²)/v_k², evaluated as 1/U_k² − 1 so the two
        // ratios stay bit-consistent even where they are ill-conditioned
        let wk = if vk == 0.0 {
            None
        } else if v1 == 0.0 {
            Some(-1.0)
        } else {
            uk.map(|u| 1.0 / (u * u) - 1.0)
        };
        u.push(uk);
        w.push(wk);
    }
    CoordRatios { u, w }
}

/// Region membership of a rotated iterate for coordinate k (2-based):
/// warm (v₁² ≥ 3/4), warm-aux (v₁² ≥ 2/3), mid_k (v₁² ≥ 3v_k²) and cold
/// (v₁² ≥ max_{i≥2} v_i², ties allowed).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Regions {
    pub warm: bool,
    pub warm_aux: bool,
    pub mid: bool,
    pub cold: bool,
}

pub fn region_of(v: &UnitVector, k: usize) -> Result<Regions> {
    let vec = v.as_vector();
    let d = vec.len();
    if k < 2 || k > d {
        return Err(Error::IndexOutOfRange { index: k, d });
    }
    let v1_sq = vec[0] * vec[0];
    let vk_sq = vec[k - 1] * vec[k - 1];
    let max_rest = (1..d).map(|i| vec[i] * vec[i]).fold(0.0f64, f64::max);
    Ok(Regions {
        warm: v1_sq >= 0.75,
        warm_aux: v1_sq >= 2.0 / 3.0,
        mid: v1_sq >= 3.0 * vk_sq,
        cold: v1_sq >= max_rest,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct ObjectiveEstimate {
    /// Monte-Carlo estimate of −sign(μ₄−3)·E(uᵀX)⁴.
    pub value: f64,
    pub std_error: f64,
}

pub fn objective_estimate(
    u: &UnitVector,
    model: &MixingModel,
    n_mc: usize,
    seed: u64,
) -> ObjectiveEstimate {
    let sign = (model.source().mu4 - 3.0).signum();
    let mut stream = ObservationStream::new(model, seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n_mc {
        let x = stream.next_observation();
        let y = -sign * u.dot(&x).powi(4);
        sum += y;
        sum_sq += y * y;
    }
    let n = n_mc as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    ObjectiveEstimate {
        value: mean,
        std_error: (var / n).sqrt(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RescaledTimeKind {
    /// Contraction at rate 1 − η|μ₄−3|/3 (warm start).
    Warm,
    /// Contraction at rate 1 − η|μ₄−3|/(2d) (uniform init).
    Uniform,
}

/// Iteration horizon ⌈τ·log((|μ₄−3|/B⁸)η⁻¹) / (−log(1 − rate))⌉ over which
/// the dynamics are controlled. Report-only.
pub fn rescaled_time(
    kind: RescaledTimeKind,
    eta: f64,
    tau: f64,
    mu4: f64,
    b: f64,
    d: usize,
) -> Result<u64> {
    let m = (mu4 - 3.0).abs();
    let numer_arg = m / (b.powi(8) * eta);
    if numer_arg.is_nan() || numer_arg <= 1.0 {
        return Err(Error::ScheduleInfeasible(format!(
            "rescaled time requires |mu4-3|/(B^8 eta) > 1, got {numer_arg:.6e}"
        )));
    }
    let rate = match kind {
        RescaledTimeKind::Warm => eta * m / 3.0,
        RescaledTimeKind::Uniform => eta * m / (2.0 * d as f64),
    };
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::ScheduleInfeasible(format!(
            "rescaled time requires contraction rate in (0, 1), got {rate:.6e}"
        )));
    }
    Ok((tau * numer_arg.ln() / -(1.0 - rate).ln()).ceil() as u64)
}
