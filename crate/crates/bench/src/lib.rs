//! Seeded inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sigpde_core::TimeSeries;

/// Brownian motion with unit variance at t = 1 on `len` uniform points of
/// [0, 1], started at 0. This is the setting of the refinement benchmarks.
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
    TimeSeries::new(times, values, dim).expect("valid path")
}

pub fn brownian_paths(seed: u64, count: usize, len: usize, dim: usize) -> Vec<TimeSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| brownian_path(&mut rng, len, dim)).collect()
}
