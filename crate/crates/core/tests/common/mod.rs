#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sigpde_core::TimeSeries;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Brownian motion with unit variance at t = 1, sampled on `len` uniform
/// points of [0, 1] and started at 0.
pub fn brownian_path<R: Rng>(rng: &mut R, len: usize, dim: usize) -> TimeSeries {
    let sd = (1.0 / (len - 1) as f64).sqrt();
    let mut values = vec![0.0; dim];
    for i in 1..len {
        for k in 0..dim {
            let prev = values[(i - 1) * dim + k];
            values.push(prev + sd * rng.sample::<f64, _>(StandardNormal));
        }
    }
    let times = (0..len).map(|i| i as f64 / (len - 1) as f64).collect();
    TimeSeries::new(times, values, dim).unwrap()
}

/// A random pair with lengths in `2..=max_len`, a shared dimension in
/// `1..=max_dim`, and each path rescaled so its largest entry is 1.
pub fn oracle_pair<R: Rng>(rng: &mut R, max_len: usize, max_dim: usize) -> (TimeSeries, TimeSeries) {
    let dim = rng.random_range(1..=max_dim);
    let lx = rng.random_range(2..=max_len);
    let ly = rng.random_range(2..=max_len);
    (
        brownian_path(rng, lx, dim).rescale_max_abs(),
        brownian_path(rng, ly, dim).rescale_max_abs(),
    )
}

/// Uniform samples in [-1, 1].
pub fn uniform_path<R: Rng>(rng: &mut R, len: usize, dim: usize) -> TimeSeries {
    let rows: Vec<Vec<f64>> = (0..len)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect();
    TimeSeries::from_rows(&rows).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}
