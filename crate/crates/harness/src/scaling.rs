//! Scaling sweeps over d or T with ordinary least squares on the log-log
//! points, validating the √(d/T) error behavior.

use std::fmt;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::runner::run_point;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    D,
    T,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::D => "d",
            Axis::T => "T",
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ScalingPoint {
    pub value: usize,
    /// Mean over replications of the per-run final-window error.
    pub mean_error: f64,
    /// Standard error of that mean across replications.
    pub stderr: f64,
    pub n_runs: usize,
}

#[derive(Clone, Debug)]
pub struct ScalingSummary {
    pub axis: Axis,
    pub points: Vec<ScalingPoint>,
    pub fitted_slope: f64,
    pub slope_stderr: f64,
}

/// Closed-form OLS of y on x; returns (slope, intercept, slope stderr).
pub fn ols(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return Err(Error::FitFailed(format!(
            "need at least 3 points for a slope fit, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::FitFailed("degenerate x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let stderr = if n > 2 {
        (ss_res / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok((slope, intercept, stderr))
}

/// Run every point of the list axis and fit the log-log slope of the mean
/// final-window error. Points with non-positive or non-finite mean error
/// are excluded from the fit with a warning on stderr.
pub fn scaling_sweep(config: &ExperimentConfig, quiet: bool) -> Result<ScalingSummary> {
    config.validate()?;
    let axis = if config.d.len() > 1 { Axis::D } else { Axis::T };
    let values: &[usize] = match axis {
        Axis::D => &config.d,
        Axis::T => &config.t,
    };
    if values.len() < 3 {
        return Err(Error::FitFailed(format!(
            "sweep needs at least 3 {axis} points, got {}",
            values.len()
        )));
    }

    let mut points = Vec::with_capacity(values.len());
    for (idx, &value) in values.iter().enumerate() {
        let (d, t_total) = match axis {
            Axis::D => (value, config.t[0]),
            Axis::T => (config.d[0], value),
        };
        let outcomes = run_point(
            d,
            t_total,
            &config.distribution,
            &config.schedule,
            config.replications,
            config.seed,
            config.record_stride,
            config.final_window,
            idx,
        )?;
        let errs: Vec<f64> = outcomes.iter().map(|o| o.window_mean_error).collect();
        let n = errs.len() as f64;
        let mean = errs.iter().sum::<f64>() / n;
        let var = errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
        let stderr = (var / n).sqrt();
        if !quiet {
            eprintln!("{axis} = {value}: mean_error = {mean:.6}, stderr = {stderr:.6}");
        }
        points.push(ScalingPoint {
            value,
            mean_error: mean,
            stderr,
            n_runs: outcomes.len(),
        });
    }

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for p in &points {
        if p.mean_error.is_finite() && p.mean_error > 0.0 {
            xs.push((p.value as f64).ln());
            ys.push(p.mean_error.ln());
        } else if !quiet {
            eprintln!(
                "warning: excluding {axis} = {} from fit (mean_error = {})",
                p.value, p.mean_error
            );
        }
    }
    let (fitted_slope, _, slope_stderr) = ols(&xs, &ys)?;
    Ok(ScalingSummary {
        axis,
        points,
        fitted_slope,
        slope_stderr,
    })
}

/// Regime advisory: the finite-sample guarantees need d⁴/T small; warn
/// (but still run) when it is not.
pub fn regime_warning(d: usize, t_total: usize) -> Option<String> {
    let ratio = (d as f64).powi(4) / t_total as f64;
    (ratio > 1.0).then(|| {
        format!(
            "d^4/T = {ratio:.2} exceeds the scaling regime of the finite-sample \
             guarantees; results may deviate from the sqrt(d/T) rate"
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ols_exact_line() {
        // three collinear points: log e = -0.5 log T + 1
        let ts: Vec<f64> = [1e3f64, 1e4, 1e5].iter().map(|t| t.ln()).collect();
        let es: Vec<f64> = ts.iter().map(|x| -0.5 * x + 1.0).collect();
        let (slope, intercept, stderr) = ols(&ts, &es).unwrap();
        assert!((slope + 0.5).abs() < 1e-12);
        assert!((intercept - 1.0).abs() < 1e-12);
        assert!(stderr < 1e-12);
    }

    #[test]
    fn ols_matches_normal_equations() {
        let x = [1.0, 2.0, 3.0, 5.0];
        let y = [2.1, 2.9, 4.2, 6.1];
        let (slope, intercept, _) = ols(&x, &y).unwrap();
        // hand-computed normal equations
        let n = 4.0;
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let expect_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!((slope - expect_slope).abs() < 1e-12);
        assert!((intercept - (sy - expect_slope * sx) / n).abs() < 1e-12);
    }

    #[test]
    fn ols_needs_three_points() {
        assert!(ols(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn regime_warning_fires_out_of_regime() {
        assert!(regime_warning(54, 200).is_some());
        assert!(regime_warning(5, 1_000_000).is_none());
    }
}
