//! Signature kernels of multivariate time series computed by solving the
//! Goursat PDE they satisfy, without truncating the signature.
//!
//! The crate is organized around the solver in [`pde`]:
//!
//! * [`series`] and [`csv_io`] hold the input paths and their file formats;
//! * [`static_kernel`] turns a pair of paths into the PDE coefficient grid,
//!   optionally lifted through a kernel on the ambient space;
//! * [`pde`] solves the PDE on dyadically refined grids, sequentially or
//!   along antidiagonals in parallel;
//! * [`signature`] is a brute-force truncated-signature oracle used to
//!   validate the solver;
//! * [`gram`] builds Gram matrices, MMD estimates and ridge regressors;
//! * [`reduction`] sparsifies weighted path ensembles by proximal gradient
//!   descent;
//! * [`fbm`] simulates fractional Brownian motion for reduction experiments.
//!
//! ```
//! use sigpde_core::{signature_pde_kernel, KernelConfig, Scheme, StaticKernel, TimeSeries};
//!
//! let x = TimeSeries::from_rows(&[[0.0, 0.0], [0.5, 0.2], [0.3, 0.9]]).unwrap();
//! let y = TimeSeries::from_rows(&[[0.0, 0.1], [0.4, -0.3]]).unwrap();
//! let config = KernelConfig::new(StaticKernel::Linear, 3, Scheme::Explicit);
//! let k = signature_pde_kernel(&x, &y, &config).unwrap();
//! assert!(k.is_finite());
//! ```

pub mod csv_io;
pub mod error;
pub mod fbm;
pub mod gram;
pub mod parallel;
pub mod pde;
pub mod reduction;
pub mod series;
pub mod signature;
pub mod static_kernel;

pub use csv_io::{LabeledSeries, Layout};
pub use error::{Error, Result};
pub use gram::{gram, krr_fit, krr_predict, mmd_squared, GramMatrix, MmdVariant};
pub use pde::{
    analytic_linear_kernel, signature_pde_kernel, solve_explicit, solve_implicit, IncrementGrid,
    KernelConfig, PdeSolution, Scheme, Solver, Strategy,
};
pub use reduction::{
    proximal_reduce, reduce_to_support, ProxOptions, ReductionResult, WeightedEnsemble,
};
pub use series::TimeSeries;
pub use signature::{tail_bound, truncated_kernel, truncated_signature, TruncatedTensor};
pub use static_kernel::StaticKernel;
