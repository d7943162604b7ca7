//! Iteration schemes for `A X B = C`: problem container, configuration, row
//! selection, single-step kernels and the solve driver.

mod config;
mod driver;
mod problem;
pub mod select;
pub mod steps;

pub use config::{Method, SolverConfig, StepSize, StopRule};
pub use driver::{resolve_alpha, solve, solve_observed, SolveReport, StepEvent, StopReason, TraceRecord};
pub use problem::Problem;
pub use select::{
    cyclic_index, greedy_sample, greedy_threshold, greedy_threshold_from_norms, mwrbk_select,
    mwrbk_select_from_norms, rbk_sample, RatioTree, RowSampler, SelectionDiagnostics,
};
pub use steps::{
    gi_step, residual_row_step, row_step, sweep_formula_step, transform_fullcol, transform_fullrow, IterateState,
};
