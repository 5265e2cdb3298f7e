//! Exit times of Gaussian autoregressive processes.
//!
//! For a stable vector AR(1) process `X_t = A X_{t-1} + eps * xi_t` the mean
//! time to leave the strip `{x : |c^T x| < 1}` grows like
//! `exp(1 / (2 eps^2 c^T S c))`, where `S` solves the discrete Lyapunov
//! equation `S = A S A^T + Q`. This crate computes that exponent (and its
//! finite-horizon counterparts together with the extremal exit path) and
//! estimates the mean exit time by reproducible Monte Carlo simulation.
//!
//! * [`matcore`] dense matrix arithmetic, spectral radius, Lyapunov solvers
//! * [`process`] AR(1)/AR(n) models, covariance recursion, companion embedding
//! * [`ldp`] rate function, exit exponents, optimal paths, Chernoff bound
//! * [`mc`] Monte Carlo exit-time and exit-probability estimation

pub mod error;
pub mod ldp;
pub mod matcore;
pub mod mc;
pub mod process;

pub use error::{Error, Result};
pub use ldp::{ExitSpec, Horizon, Rate, RateResult, Sidedness};
pub use matcore::{Matrix, Vector};
pub use mc::{McConfig, McEstimate, Parallelism};
pub use process::{ArModel, ArnModel, NoiseShape, Path};
