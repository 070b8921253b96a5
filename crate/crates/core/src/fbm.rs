//! Exact simulation of fractional Brownian motion on a uniform grid of
//! `[0, 1]` by Cholesky factorization of its covariance.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// `R(s, t) = (s^{2H} + t^{2H} - |t - s|^{2H}) / 2`.
pub fn fbm_covariance(hurst: f64, s: f64, t: f64) -> f64 {
    let e = 2.0 * hurst;
    0.5 * (s.powf(e) + t.powf(e) - (t - s).abs().powf(e))
}

/// Sampler for one Hurst exponent on a fixed grid of `length` points.
pub struct FbmSampler {
    hurst: f64,
    times: Vec<f64>,
    factor: Cholesky<f64, Dyn>,
}

impl FbmSampler {
    pub fn new(hurst: f64, length: usize) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::Input(format!("Hurst exponent must lie in (0, 1), got {hurst}")));
        }
        if length < 2 {
            return Err(Error::Input(format!("fBM needs length >= 2, got {length}")));
        }
        let times: Vec<f64> = (0..length).map(|i| i as f64 / (length - 1) as f64).collect();
        let n = length - 1;
        let cov = DMatrix::from_fn(n, n, |i, j| fbm_covariance(hurst, times[i + 1], times[j + 1]));
        let factor = cov.cholesky().ok_or_else(|| {
            Error::Numerical(format!(
                "fBM covariance for H={hurst} on {length} points is not numerically positive definite; use a coarser grid"
            ))
        })?;
        Ok(Self {
            hurst,
            times,
            factor,
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// One path starting at 0, as a one-channel series.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TimeSeries {
        let n = self.times.len() - 1;
        let z = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let x = self.factor.l() * z;
        let values = std::iter::once(0.0).chain(x.iter().copied()).collect();
        TimeSeries::new(self.times.clone(), values, 1).expect("grid is strictly increasing")
    }
}

/// `count` independent fBM paths with Hurst exponent `hurst`, reproducible
/// from `seed`.
pub fn sample_fbm(hurst: f64, length: usize, count: usize, seed: u64) -> Result<Vec<TimeSeries>> {
    let sampler = FbmSampler::new(hurst, length)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| sampler.sample(&mut rng)).collect())
}

/// `count` paths whose Hurst exponents are drawn uniformly from `choices`.
/// Returns each path with its exponent.
pub fn sample_fbm_mixture(
    choices: &[f64],
    length: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<(f64, TimeSeries)>> {
    if choices.is_empty() {
        return Err(Error::Input("no Hurst exponents to choose from".into()));
    }
    let samplers = choices
        .iter()
        .map(|&h| FbmSampler::new(h, length))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let s = &samplers[rng.random_range(0..samplers.len())];
            (s.hurst(), s.sample(&mut rng))
        })
        .collect())
}
