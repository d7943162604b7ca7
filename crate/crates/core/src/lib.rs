//! Row-action solvers for the consistent matrix equation `A X B = C`.
//!
//! Every solver in this crate touches a single row of `A` per step and applies
//! a rank-one update to the iterate `X`. Row selection is what separates them:
//!
//! | method       | selection                                                  |
//! |--------------|------------------------------------------------------------|
//! | `Bk`         | cyclic, `i_k = k mod m`                                    |
//! | `BkFullCol`  | cyclic on `A X Q = C R^{-1}` after a thin QR of `B`        |
//! | `BkFullRow`  | cyclic on `A X = C B^T (B B^T)^{-1}`                       |
//! | `Rbk`        | random, proportional to `||A_i||^2`                        |
//! | `Grbk`       | random among rows with large weighted residual             |
//! | `Rgrbk`      | as `Grbk`, with a tunable max/average blend `theta`        |
//! | `Mwrbk`      | deterministic, maximal weighted residual                   |
//! | `Gi`         | full-gradient baseline                                     |
//!
//! The crate is organised in five modules:
//!
//! * [`linalg`]: dense and CSR storage, norms, thin QR, one-sided Jacobi SVD and
//!   the minimum-norm oracle `A^+ C B^+`.
//! * [`solvers`]: the row steps, selection rules and the [`solvers::solve`] driver.
//! * [`analysis`]: convergence-factor bounds, sweep operators and spectral radii.
//! * [`imaging`]: the colour-image blur model, PSNR and the deblurring pipeline.
//! * [`harness`]: Matrix Market input, random problems, trials, CSV traces and
//!   the `axb` command line.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod analysis;
pub mod error;
pub mod harness;
pub mod imaging;
pub mod linalg;
pub mod solvers;

pub use error::{Error, Result};
pub use linalg::{DenseMat, SparseRowMat};
pub use solvers::{solve, Method, Problem, SolveReport, SolverConfig, StepSize, StopRule};
