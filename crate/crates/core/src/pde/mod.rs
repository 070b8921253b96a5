//! Finite-difference solver for the Goursat problem satisfied by the
//! signature kernel.
//!
//! For piecewise-linear paths `x` and `y` the kernel `k(s, t)` solves
//! `d^2 k / ds dt = C[i][j] k` on each data cell, with `k = 1` along
//! `s = 0` and `t = 0`. The solver refines every data cell into
//! `2^lambda x 2^lambda` sub-cells (each carrying increment
//! `C[i][j] / 4^lambda`) and sweeps an explicit or implicit scheme across
//! them. Large grids may be swept along antidiagonals in parallel; results
//! are bitwise identical either way.

mod analytic;
mod convergence;
mod grid;
mod sweep;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::static_kernel::{lifted_increment_grid, StaticKernel};
use sweep::Refined;

pub use analytic::{analytic_cell_value, analytic_linear_kernel};
pub use convergence::{
    convergence_study, convergence_study_analytic, convergence_study_grid,
    convergence_study_with_reference, ConvergencePoint,
};
pub use grid::IncrementGrid;

/// Largest refinement level accepted unless a solver is configured otherwise.
pub const DEFAULT_MAX_LAMBDA: u32 = 10;

/// Grids with fewer refined cells than this are swept sequentially under
/// [`Strategy::Auto`].
pub const DEFAULT_WAVEFRONT_MIN_CELLS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// `k11 = k10 + k01 - k00 + inc/2 (k10 + k01)`
    #[default]
    Explicit,
    /// `k11 (1 - inc/4) = k10 + k01 - k00 + inc/4 (k00 + k10 + k01)`
    Implicit,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Explicit => "explicit",
            Scheme::Implicit => "implicit",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(Scheme::Explicit),
            "implicit" => Ok(Scheme::Implicit),
            other => Err(Error::Input(format!(
                "unknown scheme {other:?} (expected explicit or implicit)"
            ))),
        }
    }
}

/// How the refined grid is traversed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Wavefront on the current rayon pool when it has more than one thread
    /// and the grid has at least `min_cells` cells; sequential otherwise.
    Auto { min_cells: usize },
    Sequential,
    Wavefront,
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy::Auto {
            min_cells: DEFAULT_WAVEFRONT_MIN_CELLS,
        }
    }
}

/// Numerical solution on the refined grid `P_lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeSolution {
    pub lambda: u32,
    pub scheme: Scheme,
    rows: usize,
    cols: usize,
    grid: Vec<f64>,
}

impl PdeSolution {
    /// Number of refined grid points along `s` (`2^lambda m + 1`).
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.grid[i * self.cols + j]
    }

    /// Value at the coarse grid point `(i, j)` of the original data grid.
    pub fn at_coarse(&self, i: usize, j: usize) -> f64 {
        let f = 1usize << self.lambda;
        self.at(i * f, j * f)
    }

    /// The kernel value `k(u', v')` at the far corner.
    pub fn final_value(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }
}

/// Solver settings: scheme, refinement level and traversal strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solver {
    pub scheme: Scheme,
    pub lambda: u32,
    pub max_lambda: u32,
    pub strategy: Strategy,
}

impl Solver {
    pub fn new(scheme: Scheme, lambda: u32) -> Self {
        Self {
            scheme,
            lambda,
            max_lambda: DEFAULT_MAX_LAMBDA,
            strategy: Strategy::default(),
        }
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_max_lambda(mut self, max_lambda: u32) -> Self {
        self.max_lambda = max_lambda;
        self
    }

    fn prepare(&self, grid: &IncrementGrid) -> Result<Vec<f64>> {
        if self.lambda > self.max_lambda {
            return Err(Error::Budget(format!(
                "refinement level {} exceeds the configured maximum {}",
                self.lambda, self.max_lambda
            )));
        }
        let factor = 4f64.powi(self.lambda as i32);
        let scaled: Vec<f64> = grid.values().iter().map(|c| c / factor).collect();
        if self.scheme == Scheme::Implicit {
            if let Some(k) = scaled
                .iter()
                .position(|z| (1.0 - 0.25 * z).abs() <= 1e-12)
            {
                return Err(Error::SingularCell {
                    row: k / grid.cols(),
                    col: k % grid.cols(),
                    lambda: self.lambda,
                });
            }
        }
        Ok(scaled)
    }

    fn use_wavefront(&self, cells: usize) -> bool {
        match self.strategy {
            Strategy::Sequential => false,
            Strategy::Wavefront => true,
            Strategy::Auto { min_cells } => {
                cells >= min_cells && rayon::current_num_threads() > 1
            }
        }
    }

    fn refined<'a>(&self, grid: &IncrementGrid, scaled: &'a [f64]) -> Refined<'a> {
        Refined {
            coarse: scaled,
            coarse_cols: grid.cols(),
            shift: self.lambda,
            rows: grid.rows() << self.lambda,
            cols: grid.cols() << self.lambda,
            scheme: self.scheme,
        }
    }

    /// Solves on the full refined grid and keeps every value.
    pub fn solve(&self, grid: &IncrementGrid) -> Result<PdeSolution> {
        let scaled = self.prepare(grid)?;
        let r = self.refined(grid, &scaled);
        let values = if self.use_wavefront(r.rows * r.cols) {
            r.wavefront_full()
        } else {
            r.sweep_full()
        };
        Ok(PdeSolution {
            lambda: self.lambda,
            scheme: self.scheme,
            rows: r.rows + 1,
            cols: r.cols + 1,
            grid: values,
        })
    }

    /// Solves keeping only `O(m + n)` state and returns the far-corner value.
    pub fn solve_final(&self, grid: &IncrementGrid) -> Result<f64> {
        let scaled = self.prepare(grid)?;
        let r = self.refined(grid, &scaled);
        Ok(if self.use_wavefront(r.rows * r.cols) {
            r.wavefront_final()
        } else {
            r.sweep_final()
        })
    }
}

pub fn solve_explicit(grid: &IncrementGrid, lambda: u32) -> Result<PdeSolution> {
    Solver::new(Scheme::Explicit, lambda).solve(grid)
}

pub fn solve_implicit(grid: &IncrementGrid, lambda: u32) -> Result<PdeSolution> {
    Solver::new(Scheme::Implicit, lambda).solve(grid)
}

/// Everything that determines a signature kernel value besides the two
/// paths. Serialized as the provenance record of exported Gram matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    #[serde(flatten)]
    pub static_kernel: StaticKernel,
    pub lambda: u32,
    pub scheme: Scheme,
    /// Divide each path by its largest absolute entry before solving.
    pub rescale: bool,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            static_kernel: StaticKernel::Linear,
            lambda: 0,
            scheme: Scheme::Explicit,
            rescale: false,
        }
    }
}

impl KernelConfig {
    pub fn new(static_kernel: StaticKernel, lambda: u32, scheme: Scheme) -> Self {
        Self {
            static_kernel,
            lambda,
            scheme,
            rescale: false,
        }
    }

    pub fn with_rescale(mut self, rescale: bool) -> Self {
        self.rescale = rescale;
        self
    }

    pub fn solver(&self) -> Solver {
        Solver::new(self.scheme, self.lambda)
    }

    /// The coefficient grid for the pair, after optional rescaling.
    pub fn grid(&self, x: &TimeSeries, y: &TimeSeries) -> Result<IncrementGrid> {
        if self.rescale {
            lifted_increment_grid(&self.static_kernel, &x.rescale_max_abs(), &y.rescale_max_abs())
        } else {
            lifted_increment_grid(&self.static_kernel, x, y)
        }
    }

    pub fn kernel_with(&self, solver: &Solver, x: &TimeSeries, y: &TimeSeries) -> Result<f64> {
        solver.solve_final(&self.grid(x, y)?)
    }
}

/// The signature kernel `k(x, y)` read off the far corner of the PDE
/// solution.
pub fn signature_pde_kernel(x: &TimeSeries, y: &TimeSeries, config: &KernelConfig) -> Result<f64> {
    config.kernel_with(&config.solver(), x, y)
}
