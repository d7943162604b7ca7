//! Experiment plumbing: Matrix Market input, random problems, repeated
//! trials, CSV traces, the invariant suite and the `axb` command line.

mod cli;
mod mtx;
mod random;
mod trace;
mod trials;
pub mod verify;

pub use cli::cli;
pub use mtx::{parse_matrix_market, read_matrix_market, read_matrix_market_dense, write_matrix_market};
pub use random::{randn, random_problem, RandomSpec};
pub use trace::{
    parse_trace_csv, read_trace_csv, trace_csv_string, write_trace_csv, write_trace_csv_with, TRACE_HEADER,
};
pub use trials::{
    format_summary_table, run_trials, summary_csv, ExperimentSpec, MethodSummary, ProblemSource, Stat, TrialStats,
};
pub use verify::{bounds_csv, run_verify, CheckResult, VerifyReport};
