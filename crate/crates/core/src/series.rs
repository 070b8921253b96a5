//! Multivariate time series and the preprocessing transforms applied before
//! kernel evaluation.

use crate::error::{Error, Result};

/// A time-stamped sequence of `dim`-dimensional observations.
///
/// Values are stored row-major: sample `i` occupies
/// `values[i * dim..(i + 1) * dim]`. Kernel computations read only the
/// sample order; timestamps enter solely through [`TimeSeries::time_augment`].
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    dim: usize,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("time series dimension must be at least 1".into()));
        }
        if times.is_empty() {
            return Err(Error::Input("time series needs at least one sample".into()));
        }
        if values.len() != times.len() * dim {
            return Err(Error::Shape(format!(
                "{} values cannot fill {} samples of dimension {}",
                values.len(),
                times.len(),
                dim
            )));
        }
        if let Some(i) = times.iter().position(|t| !t.is_finite()) {
            return Err(Error::Input(format!("non-finite time at sample {i}")));
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Input(format!(
                "times must be strictly increasing (sample {} has t={} after t={})",
                i + 1,
                times[i + 1],
                times[i]
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite value at sample {}", k / dim)));
        }
        Ok(Self { times, values, dim })
    }

    /// Builds a series from sample rows with times `0, 1, 2, ...`.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        let times = (0..rows.len()).map(|i| i as f64).collect();
        Self::new(times, values, dim)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn samples(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    /// Increment `x_{i+1} - x_i` written into `out`.
    pub fn increment_into(&self, i: usize, out: &mut [f64]) {
        let (a, b) = (self.sample(i), self.sample(i + 1));
        for ((o, &a), &b) in out.iter_mut().zip(a).zip(b) {
            *o = b - a;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Length of the piecewise-linear interpolation under the Euclidean norm.
    pub fn one_variation(&self) -> f64 {
        self.values
            .chunks_exact(self.dim)
            .zip(self.values.chunks_exact(self.dim).skip(1))
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(a, b)| (b - a) * (b - a))
                    .sum::<f64>()
                    .sqrt()
            })
            .sum()
    }

    /// Divides every value by the largest absolute entry, leaving the series
    /// untouched when that entry is below `1e-300`.
    pub fn rescale_max_abs(&self) -> Self {
        let m = self.max_abs();
        if m <= 1e-300 {
            return self.clone();
        }
        self.map_values(|v| v / m)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_values(|v| v * c)
    }

    /// Prepends the time channel normalized to `[0, 1]`. A single-sample
    /// series gets time `0`.
    pub fn time_augment(&self) -> Self {
        let t0 = self.times[0];
        let span = self.times[self.times.len() - 1] - t0;
        let dim = self.dim + 1;
        let mut values = Vec::with_capacity(self.len() * dim);
        for (t, row) in self.times.iter().zip(self.samples()) {
            values.push(if span > 0.0 { (t - t0) / span } else { 0.0 });
            values.extend_from_slice(row);
        }
        Self {
            times: self.times.clone(),
            values,
            dim,
        }
    }

    /// Inserts the midpoint of every segment, in both time and value.
    pub fn insert_midpoints(&self) -> Result<Self> {
        if self.len() < 2 {
            return Err(Error::Input(
                "insert_midpoints needs at least two samples".into(),
            ));
        }
        let n = 2 * self.len() - 1;
        let mut times = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n * self.dim);
        for i in 0..self.len() - 1 {
            times.push(self.times[i]);
            values.extend_from_slice(self.sample(i));
            times.push(0.5 * (self.times[i] + self.times[i + 1]));
            values.extend(
                self.sample(i)
                    .iter()
                    .zip(self.sample(i + 1))
                    .map(|(a, b)| 0.5 * (a + b)),
            );
        }
        times.push(self.times[self.len() - 1]);
        values.extend_from_slice(self.sample(self.len() - 1));
        Self::new(times, values, self.dim)
    }

    fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            times: self.times.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            dim: self.dim,
        }
    }
}
