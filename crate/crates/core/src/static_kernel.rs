//! Static kernels on the ambient space and the lifted increment grid that
//! drives the PDE.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pde::IncrementGrid;
use crate::series::TimeSeries;

/// A kernel on `R^d`.
///
/// Serialized as `{"static_kernel": "linear"}` or
/// `{"static_kernel": "rbf", "sigma": s}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "static_kernel", rename_all = "lowercase")]
pub enum StaticKernel {
    /// `<a, b>`
    Linear,
    /// `exp(-|a - b|^2 / (2 sigma^2))`
    Rbf { sigma: f64 },
}

impl Default for StaticKernel {
    fn default() -> Self {
        StaticKernel::Linear
    }
}

impl fmt::Display for StaticKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StaticKernel::Linear => write!(f, "linear"),
            StaticKernel::Rbf { sigma } => write!(f, "rbf(sigma={sigma})"),
        }
    }
}

impl StaticKernel {
    pub fn rbf(sigma: f64) -> Result<Self> {
        let k = StaticKernel::Rbf { sigma };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StaticKernel::Linear => Ok(()),
            StaticKernel::Rbf { sigma } if sigma > 0.0 && sigma.is_finite() => Ok(()),
            StaticKernel::Rbf { sigma } => Err(Error::Input(format!(
                "rbf bandwidth must be positive and finite, got {sigma}"
            ))),
        }
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::Shape(format!(
                "static kernel on vectors of length {} and {}",
                a.len(),
                b.len()
            )));
        }
        Ok(self.eval_unchecked(a, b))
    }

    fn eval_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            StaticKernel::Linear => dot(a, b),
            StaticKernel::Rbf { sigma } => {
                let sq: f64 = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum();
                (-sq / (2.0 * sigma * sigma)).exp()
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

fn check_pair(x: &TimeSeries, y: &TimeSeries) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::Shape(format!(
            "paths of dimension {} and {}",
            x.dim(),
            y.dim()
        )));
    }
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::Input(format!(
            "paths need at least two samples (got {} and {})",
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

/// The raw grid `C[i][j] = <x_{i+1} - x_i, y_{j+1} - y_j>`.
pub fn increment_grid(x: &TimeSeries, y: &TimeSeries) -> Result<IncrementGrid> {
    check_pair(x, y)?;
    let d = x.dim();
    let dx: Vec<f64> = (0..x.len() - 1)
        .flat_map(|i| {
            let (a, b) = (x.sample(i), x.sample(i + 1));
            (0..d).map(move |k| b[k] - a[k])
        })
        .collect();
    let dy: Vec<f64> = (0..y.len() - 1)
        .flat_map(|j| {
            let (a, b) = (y.sample(j), y.sample(j + 1));
            (0..d).map(move |k| b[k] - a[k])
        })
        .collect();
    let mut values = Vec::with_capacity((x.len() - 1) * (y.len() - 1));
    for u in dx.chunks_exact(d) {
        for v in dy.chunks_exact(d) {
            values.push(dot(u, v));
        }
    }
    IncrementGrid::new(x.len() - 1, y.len() - 1, values)
}

/// Second differences of `kernel` over consecutive sample pairs:
///
/// `C[i][j] = k(x_{i+1}, y_{j+1}) - k(x_i, y_{j+1}) - k(x_{i+1}, y_j) + k(x_i, y_j)`.
///
/// For the linear kernel this equals the raw increment grid by bilinearity,
/// and that grid is returned directly.
pub fn lifted_increment_grid(
    kernel: &StaticKernel,
    x: &TimeSeries,
    y: &TimeSeries,
) -> Result<IncrementGrid> {
    kernel.validate()?;
    match kernel {
        StaticKernel::Linear => increment_grid(x, y),
        StaticKernel::Rbf { .. } => second_difference_grid(kernel, x, y),
    }
}

pub(crate) fn second_difference_grid(
    kernel: &StaticKernel,
    x: &TimeSeries,
    y: &TimeSeries,
) -> Result<IncrementGrid> {
    check_pair(x, y)?;
    let (m, n) = (x.len(), y.len());
    let mut gram = Vec::with_capacity(m * n);
    for a in x.samples() {
        for b in y.samples() {
            gram.push(kernel.eval_unchecked(a, b));
        }
    }
    let at = |i: usize, j: usize| gram[i * n + j];
    let mut values = Vec::with_capacity((m - 1) * (n - 1));
    for i in 0..m - 1 {
        for j in 0..n - 1 {
            // Grouped so that swapping x and y yields the transpose exactly.
            values.push((at(i + 1, j + 1) + at(i, j)) - (at(i, j + 1) + at(i + 1, j)));
        }
    }
    IncrementGrid::new(m - 1, n - 1, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(rows: &[&[f64]]) -> TimeSeries {
        TimeSeries::from_rows(rows).unwrap()
    }

    fn sample_pair() -> (TimeSeries, TimeSeries) {
        (
            path(&[&[0.1, 0.2], &[0.4, -0.3], &[-0.2, 0.5], &[0.7, 0.7]]),
            path(&[&[-0.5, 0.0], &[0.3, 0.3], &[0.0, -0.6]]),
        )
    }

    #[test]
    fn eval_values() {
        assert_eq!(StaticKernel::Linear.eval(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 5.0);
        let rbf = StaticKernel::rbf(1.0).unwrap();
        assert_eq!(rbf.eval(&[0.3, 0.1], &[0.3, 0.1]).unwrap(), 1.0);
        assert!((rbf.eval(&[0.0], &[2.0]).unwrap() - (-2.0f64).exp()).abs() < 1e-16);
        assert!((rbf.eval(&[0.0], &[2.0]).unwrap() - 0.135335).abs() < 1e-6);
    }

    #[test]
    fn eval_dimension_mismatch() {
        assert!(matches!(
            StaticKernel::Linear.eval(&[1.0], &[1.0, 2.0]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn rejects_bad_bandwidth() {
        assert!(StaticKernel::rbf(0.0).is_err());
        assert!(StaticKernel::rbf(-1.0).is_err());
        assert!(StaticKernel::rbf(f64::NAN).is_err());
    }

    #[test]
    fn serde_shape() {
        let k: StaticKernel = serde_json::from_str(r#"{"static_kernel":"rbf","sigma":0.5}"#).unwrap();
        assert_eq!(k, StaticKernel::Rbf { sigma: 0.5 });
        let k: StaticKernel = serde_json::from_str(r#"{"static_kernel":"linear"}"#).unwrap();
        assert_eq!(k, StaticKernel::Linear);
        assert!(serde_json::from_str::<StaticKernel>(r#"{"static_kernel":"matern"}"#).is_err());
        assert!(serde_json::from_str::<StaticKernel>(r#"{"static_kernel":"rbf"}"#).is_err());
    }

    #[test]
    fn linear_second_difference_matches_increments() {
        let (x, y) = sample_pair();
        let raw = increment_grid(&x, &y).unwrap();
        let lifted = second_difference_grid(&StaticKernel::Linear, &x, &y).unwrap();
        for (a, b) in raw.values().iter().zip(lifted.values()) {
            assert!((a - b).abs() <= 1e-14);
        }
    }

    #[test]
    fn constant_second_path_gives_zero_grid() {
        let (x, _) = sample_pair();
        let c = path(&[&[0.3, 0.3], &[0.3, 0.3], &[0.3, 0.3]]);
        for k in [StaticKernel::Linear, StaticKernel::Rbf { sigma: 0.7 }] {
            let g = lifted_increment_grid(&k, &x, &c).unwrap();
            assert!(g.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn wide_rbf_approaches_scaled_linear() {
        let (x, y) = sample_pair();
        let lin = increment_grid(&x, &y).unwrap();
        let mut prev = f64::INFINITY;
        for sigma in [10.0, 100.0, 1000.0] {
            let g = lifted_increment_grid(&StaticKernel::Rbf { sigma }, &x, &y).unwrap();
            let worst = g
                .values()
                .iter()
                .zip(lin.values())
                .map(|(r, l)| ((r * sigma * sigma - l) / l).abs())
                .fold(0.0, f64::max);
            assert!(worst < prev);
            prev = worst;
        }
        assert!(prev < 1e-4, "relative deviation {prev}");
    }

    #[test]
    fn transposition() {
        let (x, y) = sample_pair();
        for k in [StaticKernel::Linear, StaticKernel::Rbf { sigma: 0.8 }] {
            let a = lifted_increment_grid(&k, &x, &y).unwrap();
            let b = lifted_increment_grid(&k, &y, &x).unwrap();
            assert_eq!(a.transpose(), b);
        }
    }

    #[test]
    fn too_few_samples() {
        let x = path(&[&[0.0]]);
        let (y, _) = sample_pair();
        let y1 = path(&[&[0.0, 0.0], &[1.0, 1.0]]);
        assert!(matches!(increment_grid(&x, &x), Err(Error::Input(_))));
        assert!(matches!(increment_grid(&x, &y), Err(Error::Shape(_))));
        assert!(increment_grid(&y1, &y).is_ok());
    }
}
