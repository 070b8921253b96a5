//! Truncated signatures and truncated signature kernels, computed by brute
//! force in the dense tensor algebra.
//!
//! This is the ground truth the PDE solver is checked against. It favours
//! obviousness over speed: every level is a dense array of `dim^k`
//! coefficients in lexicographic multi-index order, and a path's signature
//! is obtained by folding segment exponentials with the truncated tensor
//! product.

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Default cap on the total number of coefficients an oracle tensor may hold.
pub const DEFAULT_COEFFICIENT_BUDGET: usize = 10_000_000;

/// An element of the truncated tensor algebra `T^N(R^d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedTensor {
    dim: usize,
    order: usize,
    levels: Vec<Vec<f64>>,
}

fn coefficient_count(dim: usize, order: usize) -> Option<usize> {
    let mut total = 0usize;
    let mut width = 1usize;
    for _ in 0..=order {
        total = total.checked_add(width)?;
        width = width.checked_mul(dim)?;
    }
    Some(total)
}

fn check_budget(dim: usize, order: usize, budget: usize) -> Result<()> {
    match coefficient_count(dim, order) {
        Some(n) if n <= budget => Ok(()),
        _ => Err(Error::Budget(format!(
            "truncated tensor with dim={dim}, order={order} exceeds {budget} coefficients"
        ))),
    }
}

impl TruncatedTensor {
    pub fn zeros(dim: usize, order: usize) -> Result<Self> {
        Self::zeros_with_budget(dim, order, DEFAULT_COEFFICIENT_BUDGET)
    }

    pub fn zeros_with_budget(dim: usize, order: usize, budget: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("tensor dimension must be positive".into()));
        }
        check_budget(dim, order, budget)?;
        let levels = (0..=order).map(|k| vec![0.0; dim.pow(k as u32)]).collect();
        Ok(Self { dim, order, levels })
    }

    /// The unit `(1, 0, 0, ...)`.
    pub fn unit(dim: usize, order: usize) -> Result<Self> {
        let mut t = Self::zeros(dim, order)?;
        t.levels[0][0] = 1.0;
        Ok(t)
    }

    /// Builds a tensor from explicit levels, validating their sizes.
    pub fn from_levels(dim: usize, levels: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 || levels.is_empty() {
            return Err(Error::Input("need dim >= 1 and at least level 0".into()));
        }
        for (k, level) in levels.iter().enumerate() {
            if level.len() != dim.pow(k as u32) {
                return Err(Error::Shape(format!(
                    "level {k} has {} coefficients, expected {}",
                    level.len(),
                    dim.pow(k as u32)
                )));
            }
        }
        Ok(Self {
            dim,
            order: levels.len() - 1,
            levels,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn level(&self, k: usize) -> &[f64] {
        &self.levels[k]
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    /// Euclidean inner product of level `k` with the same level of `other`.
    pub fn level_dot(&self, other: &Self, k: usize) -> f64 {
        self.levels[k]
            .iter()
            .zip(&other.levels[k])
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// Truncated tensor product: level `k` of the result is
/// `sum_{i=0..k} a_i (x) b_{k-i}`.
pub fn chen_product(a: &TruncatedTensor, b: &TruncatedTensor) -> Result<TruncatedTensor> {
    if a.dim != b.dim || a.order != b.order {
        return Err(Error::Shape(format!(
            "cannot multiply tensors of (dim, order) ({}, {}) and ({}, {})",
            a.dim, a.order, b.dim, b.order
        )));
    }
    let mut out = TruncatedTensor {
        dim: a.dim,
        order: a.order,
        levels: a.levels.iter().map(|l| vec![0.0; l.len()]).collect(),
    };
    for k in 0..=a.order {
        let target = &mut out.levels[k];
        for i in 0..=k {
            let left = &a.levels[i];
            let right = &b.levels[k - i];
            // Lexicographic order makes the outer product a block layout:
            // index (p, q) lands at p * len(right) + q.
            for (p, &u) in left.iter().enumerate() {
                if u == 0.0 {
                    continue;
                }
                let block = &mut target[p * right.len()..(p + 1) * right.len()];
                for (t, &v) in block.iter_mut().zip(right) {
                    *t += u * v;
                }
            }
        }
    }
    Ok(out)
}

/// Signature of the linear segment with the given increment: level `k` is
/// `increment^{(x) k} / k!`.
pub fn segment_exponential(increment: &[f64], order: usize) -> Result<TruncatedTensor> {
    let dim = increment.len();
    let mut out = TruncatedTensor::zeros(dim, order)?;
    out.levels[0][0] = 1.0;
    for k in 1..=order {
        let (done, rest) = out.levels.split_at_mut(k);
        let prev = &done[k - 1];
        let next = &mut rest[0];
        let inv_k = 1.0 / k as f64;
        for (p, &u) in prev.iter().enumerate() {
            for (q, &v) in increment.iter().enumerate() {
                next[p * dim + q] = u * v * inv_k;
            }
        }
    }
    Ok(out)
}

/// Signature up to `order` of the piecewise-linear path through the samples.
pub fn truncated_signature(x: &TimeSeries, order: usize) -> Result<TruncatedTensor> {
    truncated_signature_with_budget(x, order, DEFAULT_COEFFICIENT_BUDGET)
}

pub fn truncated_signature_with_budget(
    x: &TimeSeries,
    order: usize,
    budget: usize,
) -> Result<TruncatedTensor> {
    if x.len() < 2 {
        return Err(Error::Input(
            "a signature needs a path with at least two samples".into(),
        ));
    }
    check_budget(x.dim(), order, budget)?;
    let mut inc = vec![0.0; x.dim()];
    x.increment_into(0, &mut inc);
    let mut sig = segment_exponential(&inc, order)?;
    for i in 1..x.len() - 1 {
        x.increment_into(i, &mut inc);
        sig = chen_product(&sig, &segment_exponential(&inc, order)?)?;
    }
    Ok(sig)
}

/// `sum_{k<=order} <S_k(x), S_k(y)>`.
pub fn truncated_kernel(x: &TimeSeries, y: &TimeSeries, order: usize) -> Result<f64> {
    truncated_kernel_scaled(x, y, order, |_| 1.0)
}

/// Truncated kernel with each level of both signatures multiplied by
/// `level_scale(k)`, so level `k` contributes `level_scale(k)^2 <S_k(x), S_k(y)>`.
///
/// `|k| factorial(k)` gives the factorially normalized variant used in some
/// hyperparameter sweeps.
pub fn truncated_kernel_scaled(
    x: &TimeSeries,
    y: &TimeSeries,
    order: usize,
    level_scale: impl Fn(usize) -> f64,
) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::Shape(format!(
            "paths of dimension {} and {}",
            x.dim(),
            y.dim()
        )));
    }
    let sx = truncated_signature(x, order)?;
    let sy = truncated_signature(y, order)?;
    Ok((0..=order)
        .map(|k| {
            let s = level_scale(k);
            s * s * sx.level_dot(&sy, k)
        })
        .sum())
}

/// Upper bound on `|k(x, y) - truncated_kernel(x, y, order)|`:
/// `sum_{k > order} (Lx Ly)^k / (k!)^2` with `Lx`, `Ly` the Euclidean
/// 1-variations of the piecewise-linear paths.
pub fn tail_bound(x: &TimeSeries, y: &TimeSeries, order: usize) -> f64 {
    factorial_tail(x.one_variation() * y.one_variation(), order)
}

/// `sum_{k > order} z^k / (k!)^2` for `z >= 0`, summed until the terms are
/// negligible. Terms are evaluated in log space so large `z` does not
/// overflow before the factorials take over.
pub fn factorial_tail(z: f64, order: usize) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let ln_z = z.ln();
    let mut ln_fact = (1..=order + 1).map(|k| (k as f64).ln()).sum::<f64>();
    let mut sum = 0.0;
    let mut k = order + 1;
    loop {
        let term = (k as f64 * ln_z - 2.0 * ln_fact).exp();
        sum += term;
        if !sum.is_finite() {
            return f64::INFINITY;
        }
        // Terms shrink once k^2 > z; stop when they no longer move the sum.
        if (k * k) as f64 > z && term <= f64::EPSILON * sum {
            return sum;
        }
        k += 1;
        ln_fact += (k as f64).ln();
    }
}
