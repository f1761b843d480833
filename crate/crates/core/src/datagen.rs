//! Synthetic data model: Haar-random orthogonal mixing matrices and i.i.d.
//! source streams with unit variance and known fourth moment, emitting the
//! observed stream X = AZ.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Custom samplers draw one value per call from a seeded generator.
pub type SamplerFn = Arc<dyn Fn(&mut ChaCha8Rng) -> f64 + Send + Sync>;

#[derive(Clone, Debug, PartialEq)]
pub enum SourceKind {
    /// Z = ±m + N(0, σ²) with equal sign probability.
    MixtureGaussian { component_mean: f64, component_variance: f64 },
    /// Z = δ·N(0, v) with δ ~ Bernoulli(p).
    GaussianBernoulli { variance: f64, prob: f64 },
    Custom,
}

/// A zero-mean, unit-variance, non-mesokurtic source distribution together
/// with its fourth moment and sub-Gaussian bound B (ψ₂ norm = √(3/8)·B).
#[derive(Clone)]
pub struct SourceDistribution {
    pub kind: SourceKind,
    pub mu4: f64,
    pub sub_gaussian_b: f64,
    sampler: Option<SamplerFn>,
}

impl fmt::Debug for SourceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SourceDistribution")
            .field("kind", &self.kind)
            .field("mu4", &self.mu4)
            .field("sub_gaussian_b", &self.sub_gaussian_b)
            .finish()
    }
}

const SQRT_8_OVER_3: f64 = 1.632_993_161_855_452;

impl SourceDistribution {
    /// Mixture of N(±1/√2, 1/2) with equal weights; μ₄ = 2.5.
    pub fn mixture_gaussian() -> Self {
        Self::mixture_gaussian_with(std::f64::consts::FRAC_1_SQRT_2, 0.5).unwrap()
    }

    /// Z = δ·Y with Y ~ N(0, 2), δ ~ Bernoulli(1/2); μ₄ = 6.
    pub fn gaussian_bernoulli() -> Self {
        Self::gaussian_bernoulli_with(2.0, 0.5).unwrap()
    }

    pub fn mixture_gaussian_with(component_mean: f64, component_variance: f64) -> Result<Self> {
        if component_variance.is_nan() || component_variance <= 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "mixture component variance must be positive, got {component_variance}"
            )));
        }
        let m2 = component_mean * component_mean + component_variance;
        if (m2 - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!(
                "mixture second moment is {m2}, expected 1 (whitened model)"
            )));
        }
        let (m, s2) = (component_mean, component_variance);
        let mu4 = m.powi(4) + 6.0 * m * m * s2 + 3.0 * s2 * s2;
        let psi2 = mixture_psi2_norm(m, s2);
        Ok(Self {
            kind: SourceKind::MixtureGaussian {
                component_mean,
                component_variance,
            },
            mu4,
            sub_gaussian_b: psi2 * SQRT_8_OVER_3,
            sampler: None,
        })
    }

    pub fn gaussian_bernoulli_with(variance: f64, prob: f64) -> Result<Self> {
        if variance.is_nan() || variance <= 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "variance must be positive, got {variance}"
            )));
        }
        if !(0.0..=1.0).contains(&prob) {
            return Err(Error::InvalidDistribution(format!(
                "probability must lie in [0, 1], got {prob}"
            )));
        }
        let m2 = prob * variance;
        if (m2 - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!(
                "second moment is {m2}, expected 1 (whitened model)"
            )));
        }
        let mu4 = 3.0 * prob * variance * variance;
        // E exp(Z²/K²) = (1-p) + p(1-2v/K²)^{-1/2} = 2 solves in closed form.
        let ratio = prob / (1.0 + prob);
        let psi2 = (2.0 * variance / (1.0 - ratio * ratio)).sqrt();
        Ok(Self {
            kind: SourceKind::GaussianBernoulli { variance, prob },
            mu4,
            sub_gaussian_b: psi2 * SQRT_8_OVER_3,
            sampler: None,
        })
    }

    /// Custom sources must supply their own fourth moment and B; no symbolic
    /// moment computation is attempted.
    pub fn custom(sampler: SamplerFn, mu4: f64, sub_gaussian_b: f64) -> Result<Self> {
        if sub_gaussian_b.is_nan() || sub_gaussian_b <= 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "sub_gaussian_b must be positive, got {sub_gaussian_b}"
            )));
        }
        if (mu4 - 3.0).abs() < 1e-12 {
            return Err(Error::InvalidDistribution(
                "mu4 = 3 (zero excess kurtosis) is outside the model".into(),
            ));
        }
        Ok(Self {
            kind: SourceKind::Custom,
            mu4,
            sub_gaussian_b,
            sampler: Some(sampler),
        })
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "mixture-gaussian" => Ok(Self::mixture_gaussian()),
            "gaussian-bernoulli" => Ok(Self::gaussian_bernoulli()),
            other => Err(Error::InvalidDistribution(format!(
                "unknown distribution {other:?} (known: mixture-gaussian, gaussian-bernoulli)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            SourceKind::MixtureGaussian { .. } => "mixture-gaussian",
            SourceKind::GaussianBernoulli { .. } => "gaussian-bernoulli",
            SourceKind::Custom => "custom",
        }
    }

    pub fn sample_one(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self.kind {
            SourceKind::MixtureGaussian {
                component_mean,
                component_variance,
            } => {
                let sign = if rng.random::<f64>() < 0.5 { -1.0 } else { 1.0 };
                let g: f64 = rng.sample(StandardNormal);
                sign * component_mean + component_variance.sqrt() * g
            }
            SourceKind::GaussianBernoulli { variance, prob } => {
                if rng.random::<f64>() < prob {
                    let g: f64 = rng.sample(StandardNormal);
                    variance.sqrt() * g
                } else {
                    0.0
                }
            }
            SourceKind::Custom => (self.sampler.as_ref().expect("custom sampler"))(rng),
        }
    }
}

/// ψ₂ norm of the symmetric Gaussian mixture ±m + N(0, σ²), by bisection on
/// the closed-form mgf of the squared variable.
fn mixture_psi2_norm(m: f64, s2: f64) -> f64 {
    // E exp(λZ²) = (1-2λσ²)^{-1/2} exp(λm²/(1-2λσ²)), λ = 1/K².
    let moment = |k2: f64| {
        let lam = 1.0 / k2;
        let a = 1.0 - 2.0 * lam * s2;
        a.powf(-0.5) * (lam * m * m / a).exp()
    };
    let mut lo = 2.0 * s2 * (1.0 + 1e-9);
    let mut hi = 2.0 * s2 + 1.0;
    while moment(hi) > 2.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if moment(mid) > 2.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi.sqrt()
}

/// Draw a matrix from the Haar measure on the orthogonal group: QR of an
/// i.i.d. standard Gaussian matrix with the diag(R) > 0 sign convention.
pub fn sample_haar_orthogonal(d: usize, seed: u64) -> Result<DMatrix<f64>> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let mut rng = rng_from_seed(seed);
    Ok(sample_haar_orthogonal_using(d, &mut rng))
}

pub fn sample_haar_orthogonal_using(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let (mut q, r) = g.qr().unpack();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Draw n i.i.d. source values.
pub fn sample_source(dist: &SourceDistribution, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| dist.sample_one(&mut rng)).collect()
}

/// Ground-truth generative model: orthogonal mixing matrix A and a source
/// distribution shared by all coordinates.
#[derive(Clone, Debug)]
pub struct MixingModel {
    d: usize,
    a: DMatrix<f64>,
    source: SourceDistribution,
}

impl MixingModel {
    pub fn new(a: DMatrix<f64>, source: SourceDistribution) -> Result<Self> {
        let d = a.nrows();
        if d < 2 || a.ncols() != d {
            return Err(Error::InvalidDimension(d.min(a.ncols())));
        }
        let gram = &a * a.transpose();
        for i in 0..d {
            for j in 0..d {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - expect).abs() > 1e-12 {
                    return Err(Error::InvalidDistribution(format!(
                        "mixing matrix is not orthogonal: |(AAᵀ - I)[{i},{j}]| = {:e}",
                        (gram[(i, j)] - expect).abs()
                    )));
                }
            }
        }
        Ok(Self { d, a, source })
    }

    pub fn haar(d: usize, seed: u64, source: SourceDistribution) -> Result<Self> {
        let a = sample_haar_orthogonal(d, seed)?;
        Self::new(a, source)
    }

    pub fn identity(d: usize, source: SourceDistribution) -> Result<Self> {
        Self::new(DMatrix::identity(d, d), source)
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn mixing(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn source(&self) -> &SourceDistribution {
        &self.source
    }

    /// Ground-truth component a_i (1-based).
    pub fn component(&self, index: usize) -> Result<DVector<f64>> {
        if index < 1 || index > self.d {
            return Err(Error::IndexOutOfRange {
                index,
                d: self.d,
            });
        }
        Ok(self.a.column(index - 1).into_owned())
    }
}

/// Unbounded stream of observations X = AZ, deterministic per (model, seed).
pub struct ObservationStream<'a> {
    model: &'a MixingModel,
    rng: ChaCha8Rng,
    count_emitted: u64,
}

impl<'a> ObservationStream<'a> {
    pub fn new(model: &'a MixingModel, seed: u64) -> Self {
        Self {
            model,
            rng: rng_from_seed(seed),
            count_emitted: 0,
        }
    }

    pub fn count_emitted(&self) -> u64 {
        self.count_emitted
    }

    pub fn next_observation(&mut self) -> DVector<f64> {
        let d = self.model.d;
        let source = &self.model.source;
        let z = DVector::from_fn(d, |_, _| source.sample_one(&mut self.rng));
        self.count_emitted += 1;
        &self.model.a * z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_det_is_unit() {
        let q = sample_haar_orthogonal(2, 3).unwrap();
        assert!((q.determinant().abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn haar_orthogonal_d20() {
        let q = sample_haar_orthogonal(20, 7).unwrap();
        let gram = &q * q.transpose();
        let err = (gram - DMatrix::<f64>::identity(20, 20)).abs().max();
        assert!(err < 1e-12, "max |QQᵀ - I| = {err:e}");
    }

    #[test]
    fn haar_rejects_small_dimension() {
        assert!(matches!(
            sample_haar_orthogonal(1, 0),
            Err(Error::InvalidDimension(1))
        ));
    }

    #[test]
    fn haar_entry_mean_is_zero() {
        // Haar marginals have zero mean; Var(Q₁₁) = 1/d.
        let n = 100_000;
        let mut rng = rng_from_seed(11);
        let mut sum = 0.0;
        for _ in 0..n {
            sum += sample_haar_orthogonal_using(3, &mut rng)[(0, 0)];
        }
        let mean = sum / n as f64;
        let se = (1.0f64 / 3.0 / n as f64).sqrt();
        assert!(mean.abs() < 3.0 * se, "mean = {mean}, 3·SE = {}", 3.0 * se);
    }

    fn moments(xs: &[f64]) -> (f64, f64, f64) {
        let n = xs.len() as f64;
        let m1 = xs.iter().sum::<f64>() / n;
        let m2 = xs.iter().map(|x| x * x).sum::<f64>() / n;
        let m4 = xs.iter().map(|x| x.powi(4)).sum::<f64>() / n;
        (m1, m2, m4)
    }

    fn se_of_mean(xs: impl Iterator<Item = f64> + Clone) -> f64 {
        let n = xs.clone().count() as f64;
        let mean = xs.clone().sum::<f64>() / n;
        let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        (var / n).sqrt()
    }

    #[test]
    fn mixture_gaussian_moments() {
        let dist = SourceDistribution::mixture_gaussian();
        assert!((dist.mu4 - 2.5).abs() < 1e-12);
        let xs = sample_source(&dist, 1_000_000, 5);
        let (m1, m2, m4) = moments(&xs);
        let se1 = se_of_mean(xs.iter().copied());
        let se2 = se_of_mean(xs.iter().map(|x| x * x));
        let se4 = se_of_mean(xs.iter().map(|x| x.powi(4)));
        assert!(m1.abs() < 3.0 * se1);
        assert!((m2 - 1.0).abs() < 3.0 * se2);
        assert!((m4 - 2.5).abs() < 3.0 * se4, "m4 = {m4}");
    }

    #[test]
    fn gaussian_bernoulli_moments() {
        let dist = SourceDistribution::gaussian_bernoulli();
        assert!((dist.mu4 - 6.0).abs() < 1e-12);
        let xs = sample_source(&dist, 1_000_000, 6);
        let (m1, m2, m4) = moments(&xs);
        let se1 = se_of_mean(xs.iter().copied());
        let se2 = se_of_mean(xs.iter().map(|x| x * x));
        let se4 = se_of_mean(xs.iter().map(|x| x.powi(4)));
        assert!(m1.abs() < 3.0 * se1);
        assert!((m2 - 1.0).abs() < 3.0 * se2);
        assert!((m4 - 6.0).abs() < 3.0 * se4, "m4 = {m4}");
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(SourceDistribution::gaussian_bernoulli_with(-1.0, 0.5).is_err());
        assert!(SourceDistribution::gaussian_bernoulli_with(2.0, 1.5).is_err());
        assert!(SourceDistribution::mixture_gaussian_with(0.5, -0.1).is_err());
    }

    #[test]
    fn sub_gaussian_b_defaults() {
        // Closed forms: GB default ψ₂² = 9/2 so B = √12; mixture solved
        // numerically from the squared-variable mgf.
        let gb = SourceDistribution::gaussian_bernoulli();
        assert!((gb.sub_gaussian_b - 12.0f64.sqrt()).abs() < 1e-9);
        let mix = SourceDistribution::mixture_gaussian();
        assert!((mix.sub_gaussian_b - 2.450306442).abs() < 1e-6);
    }

    #[test]
    fn identity_mixing_passes_source_through() {
        let model = MixingModel::identity(4, SourceDistribution::gaussian_bernoulli()).unwrap();
        let mut stream = ObservationStream::new(&model, 9);
        let x = stream.next_observation();
        let mut rng = rng_from_seed(9);
        let z = DVector::from_fn(4, |_, _| model.source().sample_one(&mut rng));
        assert_eq!(x, z);
        assert_eq!(stream.count_emitted(), 1);
    }

    #[test]
    fn stream_is_deterministic() {
        let model = MixingModel::haar(5, 2, SourceDistribution::mixture_gaussian()).unwrap();
        let mut s1 = ObservationStream::new(&model, 77);
        let mut s2 = ObservationStream::new(&model, 77);
        for _ in 0..100 {
            assert_eq!(s1.next_observation(), s2.next_observation());
        }
    }

    #[test]
    fn stream_covariance_is_identity() {
        let d = 20;
        let n = 100_000usize;
        let model = MixingModel::haar(d, 4, SourceDistribution::gaussian_bernoulli()).unwrap();
        let mut stream = ObservationStream::new(&model, 13);
        let mut cov = DMatrix::<f64>::zeros(d, d);
        for _ in 0..n {
            let x = stream.next_observation();
            cov += &x * x.transpose();
        }
        cov /= n as f64;
        let err = (cov - DMatrix::<f64>::identity(d, d)).abs().max();
        assert!(err < 0.05, "max |Cov - I| = {err}");
    }
}
