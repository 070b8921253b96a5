use serde::Serialize;

use super::{analytic_cell_value, IncrementGrid, KernelConfig, PdeSolution, Scheme, Solver};
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Sup-norm error of the level-`lambda` solution over the coarse data grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub lambda: u32,
    pub error: f64,
}

fn coarse_sup_error(sol: &PdeSolution, grid: &IncrementGrid, exact: impl Fn(usize, usize) -> f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..=grid.rows() {
        for j in 0..=grid.cols() {
            worst = worst.max((sol.at_coarse(i, j) - exact(i, j)).abs());
        }
    }
    worst
}

fn check_lambda_max(lambda_max: u32) -> Result<()> {
    if lambda_max == 0 {
        return Err(Error::Input("convergence study needs lambda_max >= 1".into()));
    }
    Ok(())
}

/// Errors of the `lambda = 0..=lambda_max` solutions against a reference
/// solved at `lambda_max + 2` with the same scheme.
pub fn convergence_study_grid(
    grid: &IncrementGrid,
    lambda_max: u32,
    scheme: Scheme,
) -> Result<Vec<ConvergencePoint>> {
    convergence_study_with_reference(grid, lambda_max, scheme, scheme)
}

/// As [`convergence_study_grid`] but with the reference solved by
/// `reference_scheme`.
pub fn convergence_study_with_reference(
    grid: &IncrementGrid,
    lambda_max: u32,
    scheme: Scheme,
    reference_scheme: Scheme,
) -> Result<Vec<ConvergencePoint>> {
    check_lambda_max(lambda_max)?;
    let reference = Solver::new(reference_scheme, lambda_max + 2)
        .with_max_lambda(lambda_max + 2)
        .solve(grid)?;
    (0..=lambda_max)
        .map(|lambda| {
            let sol = Solver::new(scheme, lambda)
                .with_max_lambda(lambda_max)
                .solve(grid)?;
            Ok(ConvergencePoint {
                lambda,
                error: coarse_sup_error(&sol, grid, |i, j| reference.at_coarse(i, j)),
            })
        })
        .collect()
}

/// Convergence study for a pair of paths under `config` (its `lambda` is
/// ignored).
pub fn convergence_study(
    x: &TimeSeries,
    y: &TimeSeries,
    config: &KernelConfig,
    lambda_max: u32,
) -> Result<Vec<ConvergencePoint>> {
    convergence_study_grid(&config.grid(x, y)?, lambda_max, config.scheme)
}

/// Single data cell with increment `z`, measured against the exact Bessel
/// solution instead of a refined reference. The coarse grid is the cell's
/// four corners, three of which lie on the boundary, so this is the error
/// at the far corner.
pub fn convergence_study_analytic(
    z: f64,
    lambda_max: u32,
    scheme: Scheme,
) -> Result<Vec<ConvergencePoint>> {
    check_lambda_max(lambda_max)?;
    let grid = IncrementGrid::single(z)?;
    (0..=lambda_max)
        .map(|lambda| {
            let sol = Solver::new(scheme, lambda)
                .with_max_lambda(lambda_max)
                .solve(&grid)?;
            Ok(ConvergencePoint {
                lambda,
                error: coarse_sup_error(&sol, &grid, |i, j| {
                    analytic_cell_value(z, i as f64, j as f64)
                }),
            })
        })
        .collect()
}
