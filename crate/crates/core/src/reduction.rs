//! Measure reduction: replace a weighted path ensemble `mu = sum a_i d_{x_i}`
//! by a sparse reweighting `nu = sum b_i d_{x_i}` whose kernel mean
//! embedding stays close, by minimizing
//!
//! `L(b) + penalty * |b|_1`,  `L(b) = (a - b)^T K (a - b)`,
//!
//! with proximal gradient descent (ISTA): a gradient step on `L` followed by
//! soft-thresholding at `step * penalty`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gram::GramMatrix;
use crate::series::TimeSeries;

/// A discrete probability measure on paths.
#[derive(Debug, Clone)]
pub struct WeightedEnsemble {
    paths: Vec<TimeSeries>,
    alpha: Vec<f64>,
}

impl WeightedEnsemble {
    pub fn new(paths: Vec<TimeSeries>, alpha: Vec<f64>) -> Result<Self> {
        if paths.len() != alpha.len() {
            return Err(Error::Shape(format!(
                "{} paths with {} weights",
                paths.len(),
                alpha.len()
            )));
        }
        if paths.is_empty() {
            return Err(Error::Input("empty ensemble".into()));
        }
        if let Some(i) = alpha.iter().position(|a| !(*a >= 0.0 && a.is_finite())) {
            return Err(Error::Input(format!("weight {i} is negative or not finite")));
        }
        let total: f64 = alpha.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Input(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { paths, alpha })
    }

    pub fn uniform(paths: Vec<TimeSeries>) -> Result<Self> {
        let n = paths.len();
        Self::new(paths, vec![1.0 / n as f64; n])
    }

    pub fn paths(&self) -> &[TimeSeries] {
        &self.paths
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionResult {
    pub beta: Vec<f64>,
    /// Penalized objective at `beta^0` and after every accepted iteration.
    pub loss_history: Vec<f64>,
    /// Indices with `|beta_i| > support_tol`.
    pub support: Vec<usize>,
    pub penalty: f64,
    /// Step size in effect at termination (after any backtracking).
    pub step: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl ReductionResult {
    /// Negative weights clamped to zero and the rest renormalized to sum to
    /// one. All-zero weights stay zero.
    pub fn clamped_probability(&self) -> Vec<f64> {
        let clamped: Vec<f64> = self.beta.iter().map(|b| b.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        if total > 0.0 {
            clamped.iter().map(|b| b / total).collect()
        } else {
            clamped
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxOptions {
    pub penalty: f64,
    pub step: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub support_tol: f64,
}

impl ProxOptions {
    pub fn new(penalty: f64, step: f64) -> Self {
        Self {
            penalty,
            step,
            max_iter: 100_000,
            tol: 1e-10,
            support_tol: 1e-8,
        }
    }
}

fn check_shapes(k: &GramMatrix, alpha: &[f64], beta: &[f64]) -> Result<()> {
    if !k.is_square() || k.rows() != alpha.len() || alpha.len() != beta.len() {
        return Err(Error::Shape(format!(
            "Gram {}x{} with {} alpha and {} beta weights",
            k.rows(),
            k.cols(),
            alpha.len(),
            beta.len()
        )));
    }
    Ok(())
}

fn mat_vec(k: &GramMatrix, v: &[f64]) -> Vec<f64> {
    (0..k.rows())
        .map(|i| k.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn residual(alpha: &[f64], beta: &[f64]) -> Vec<f64> {
    alpha.iter().zip(beta).map(|(a, b)| a - b).collect()
}

fn quad(k: &GramMatrix, r: &[f64]) -> f64 {
    mat_vec(k, r).iter().zip(r).map(|(a, b)| a * b).sum()
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// `L(beta) = (alpha - beta)^T K (alpha - beta)`.
pub fn reduction_loss(k: &GramMatrix, alpha: &[f64], beta: &[f64]) -> Result<f64> {
    check_shapes(k, alpha, beta)?;
    Ok(quad(k, &residual(alpha, beta)))
}

/// `grad L(beta) = -2 K (alpha - beta)` for symmetric `K`.
pub fn reduction_gradient(k: &GramMatrix, alpha: &[f64], beta: &[f64]) -> Result<Vec<f64>> {
    check_shapes(k, alpha, beta)?;
    Ok(mat_vec(k, &residual(alpha, beta))
        .into_iter()
        .map(|g| -2.0 * g)
        .collect())
}

/// Componentwise shrinkage toward zero by `gamma`, the proximal map of
/// `gamma |.|_1`.
pub fn soft_threshold(v: &[f64], gamma: f64) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            if x > gamma {
                x - gamma
            } else if x < -gamma {
                x + gamma
            } else {
                0.0
            }
        })
        .collect()
}

fn prox_step(beta: &[f64], grad: &[f64], step: f64, penalty: f64) -> Vec<f64> {
    let moved: Vec<f64> = beta.iter().zip(grad).map(|(b, g)| b - step * g).collect();
    soft_threshold(&moved, step * penalty)
}

/// `|beta - A(beta - step grad L(beta))|` with threshold `step * penalty`;
/// zero exactly at minimizers of the penalized objective.
pub fn fixed_point_residual(
    k: &GramMatrix,
    alpha: &[f64],
    beta: &[f64],
    step: f64,
    penalty: f64,
) -> Result<f64> {
    let g = reduction_gradient(k, alpha, beta)?;
    let next = prox_step(beta, &g, step, penalty);
    Ok(next
        .iter()
        .zip(beta)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// `1 / (2 lambda_max(K))`, the largest step for which plain ISTA on `L`
/// is guaranteed to descend.
pub fn default_step(k: &GramMatrix) -> Result<f64> {
    if !k.is_square() {
        return Err(Error::Shape("step size needs a square Gram".into()));
    }
    let m = k.to_matrix();
    let top = ((&m + m.transpose()) * 0.5).symmetric_eigenvalues().max();
    if !(top > 0.0) {
        return Err(Error::Numerical(format!(
            "Gram has no positive eigenvalue (largest {top})"
        )));
    }
    Ok(0.5 / top)
}

/// Proximal gradient descent from `beta^0 = alpha`.
///
/// A step that fails the quadratic upper-bound test
/// `L(b+) <= L(b) + <grad, b+ - b> + |b+ - b|^2 / (2 step)` is retried with
/// half the step, so the penalized objective never increases. Stops when
/// `|b^{k+1} - b^k| <= tol` or after `max_iter` iterations.
pub fn proximal_reduce_weights(
    alpha: &[f64],
    k: &GramMatrix,
    opts: &ProxOptions,
) -> Result<ReductionResult> {
    check_shapes(k, alpha, alpha)?;
    if !(opts.step > 0.0 && opts.step.is_finite()) {
        return Err(Error::Input(format!("step must be positive, got {}", opts.step)));
    }
    if !(opts.penalty >= 0.0 && opts.penalty.is_finite()) {
        return Err(Error::Input(format!(
            "penalty must be >= 0, got {}",
            opts.penalty
        )));
    }
    let objective = |loss: f64, beta: &[f64]| loss + opts.penalty * l1(beta);

    let mut beta = alpha.to_vec();
    let mut loss = 0.0;
    let mut step = opts.step;
    let mut history = vec![objective(loss, &beta)];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let grad = reduction_gradient(k, alpha, &beta)?;
        let (next, next_loss) = loop {
            let cand = prox_step(&beta, &grad, step, opts.penalty);
            let cand_loss = reduction_loss(k, alpha, &cand)?;
            if !cand_loss.is_finite() {
                return Err(Error::Diverged {
                    iteration: iterations,
                });
            }
            // L is quadratic, so the bound test reduces exactly to
            // d'Kd <= |d|^2 / (2 step); evaluating it in this form avoids
            // the cancellation in L(b+) - L(b) once both are tiny.
            let diff: Vec<f64> = cand.iter().zip(&beta).map(|(a, b)| a - b).collect();
            let sq: f64 = diff.iter().map(|d| d * d).sum();
            let curvature = quad(k, &diff);
            if curvature <= sq / (2.0 * step) * (1.0 + 1e-12) {
                break (cand, cand_loss);
            }
            step *= 0.5;
            if step < 1e-300 {
                return Err(Error::Diverged {
                    iteration: iterations,
                });
            }
        };
        let moved = next
            .iter()
            .zip(&beta)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        beta = next;
        loss = next_loss;
        let f = objective(loss, &beta);
        if !f.is_finite() {
            return Err(Error::Diverged {
                iteration: iterations,
            });
        }
        history.push(f);
        if moved <= opts.tol {
            converged = true;
            break;
        }
    }

    let support = beta
        .iter()
        .enumerate()
        .filter(|(_, b)| b.abs() > opts.support_tol)
        .map(|(i, _)| i)
        .collect();
    Ok(ReductionResult {
        beta,
        loss_history: history,
        support,
        penalty: opts.penalty,
        step,
        iterations,
        converged,
    })
}

/// Reduces `ensemble` given its precomputed self-Gram `k`.
pub fn proximal_reduce(
    ensemble: &WeightedEnsemble,
    k: &GramMatrix,
    opts: &ProxOptions,
) -> Result<ReductionResult> {
    proximal_reduce_weights(ensemble.alpha(), k, opts)
}

/// Bisects the penalty until the support has exactly `target` elements.
///
/// The bracket starts at `[0, max |2 K alpha|]`; at the upper end the zero
/// vector is already a fixed point. `opts.penalty` is ignored.
pub fn reduce_to_support(
    alpha: &[f64],
    k: &GramMatrix,
    target: usize,
    opts: &ProxOptions,
    max_bisections: usize,
) -> Result<ReductionResult> {
    check_shapes(k, alpha, alpha)?;
    if target > alpha.len() {
        return Err(Error::Input(format!(
            "support of size {target} requested from {} paths",
            alpha.len()
        )));
    }
    let run = |penalty: f64| proximal_reduce_weights(alpha, k, &ProxOptions { penalty, ..*opts });

    let mut lo = 0.0;
    let mut hi = mat_vec(k, alpha)
        .iter()
        .fold(0.0f64, |m, g| m.max(2.0 * g.abs()))
        * (1.0 + 1e-9);
    let at_lo = run(lo)?;
    if at_lo.support.len() == target {
        return Ok(at_lo);
    }
    let mut best = at_lo;
    for _ in 0..max_bisections {
        let mid = 0.5 * (lo + hi);
        let r = run(mid)?;
        let size = r.support.len();
        if size == target {
            return Ok(r);
        }
        if size.abs_diff(target) < best.support.len().abs_diff(target) {
            best = r;
        }
        if size > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numerical(format!(
        "no penalty in the bisection bracket gives support {target}; closest was {} at penalty {:.6e}",
        best.support.len(),
        best.penalty
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(k11: f64) -> GramMatrix {
        GramMatrix::new(1, 1, vec![k11]).unwrap()
    }

    #[test]
    fn loss_and_gradient_scalar() {
        let k = scalar(2.0);
        assert_eq!(reduction_loss(&k, &[1.0], &[0.0]).unwrap(), 2.0);
        assert_eq!(reduction_gradient(&k, &[1.0], &[0.0]).unwrap(), vec![-4.0]);
        assert_eq!(reduction_loss(&k, &[0.3], &[0.3]).unwrap(), 0.0);
        assert_eq!(reduction_gradient(&k, &[0.3], &[0.3]).unwrap(), vec![0.0]);
    }

    #[test]
    fn shape_mismatch() {
        let k = GramMatrix::identity(2);
        assert!(matches!(reduction_loss(&k, &[1.0], &[1.0]), Err(Error::Shape(_))));
        assert!(matches!(
            reduction_gradient(&k, &[1.0, 0.0], &[1.0]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn soft_threshold_branches() {
        assert_eq!(soft_threshold(&[2.5, 0.5, -3.0], 1.0), vec![1.5, 0.0, -2.0]);
        assert_eq!(soft_threshold(&[2.5, -0.5], 0.0), vec![2.5, -0.5]);
        assert_eq!(soft_threshold(&[1.0, -1.0], 1.0), vec![0.0, 0.0]);
    }

    #[test]
    fn scalar_lasso_solution() {
        let (k11, a) = (2.0, 0.8);
        for penalty in [0.0, 0.5, 1.0, 3.2, 5.0] {
            let opts = ProxOptions {
                tol: 1e-13,
                ..ProxOptions::new(penalty, 0.2)
            };
            let r = proximal_reduce_weights(&[a], &scalar(k11), &opts).unwrap();
            let expected = f64::max(a - penalty / (2.0 * k11), 0.0);
            assert!((r.beta[0] - expected).abs() < 1e-6, "penalty {penalty}: {:?}", r.beta);
        }
    }

    #[test]
    fn backtracking_recovers_from_large_step() {
        let k = GramMatrix::new(2, 2, vec![2.0, 0.5, 0.5, 1.0]).unwrap();
        let opts = ProxOptions::new(0.1, 10.0);
        let r = proximal_reduce_weights(&[0.5, 0.5], &k, &opts).unwrap();
        assert!(r.converged);
        assert!(r.step < 10.0);
        for w in r.loss_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
    }

    #[test]
    fn ensemble_validation() {
        let p = TimeSeries::from_rows(&[[0.0], [1.0]]).unwrap();
        assert!(WeightedEnsemble::new(vec![p.clone()], vec![0.5]).is_err());
        assert!(WeightedEnsemble::new(vec![p.clone(), p.clone()], vec![1.5, -0.5]).is_err());
        assert!(WeightedEnsemble::new(vec![p.clone()], vec![1.0, 0.0]).is_err());
        assert_eq!(WeightedEnsemble::uniform(vec![p.clone(), p]).unwrap().alpha(), &[0.5, 0.5]);
    }

    #[test]
    fn clamping_renormalizes() {
        let r = ReductionResult {
            beta: vec![0.3, -0.1, 0.1],
            loss_history: vec![],
            support: vec![0, 1, 2],
            penalty: 0.0,
            step: 1.0,
            iterations: 0,
            converged: true,
        };
        let p = r.clamped_probability();
        assert!((p[0] - 0.75).abs() < 1e-15 && p[1] == 0.0 && (p[2] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_options() {
        let k = scalar(1.0);
        assert!(proximal_reduce_weights(&[1.0], &k, &ProxOptions::new(0.0, 0.0)).is_err());
        assert!(proximal_reduce_weights(&[1.0], &k, &ProxOptions::new(-1.0, 0.1)).is_err());
        assert!(reduce_to_support(&[1.0], &k, 2, &ProxOptions::new(0.0, 0.1), 10).is_err());
    }
}
