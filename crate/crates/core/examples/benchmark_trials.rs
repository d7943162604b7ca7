//! Repeated trials with per-trial seeds and the IT / CPU / SD / range table.

use axb_kaczmarz::harness::{format_summary_table, run_trials, ExperimentSpec, ProblemSource, RandomSpec};
use axb_kaczmarz::{Method, SolverConfig, StopRule};

fn main() -> axb_kaczmarz::Result<()> {
    let cfg = SolverConfig::default().with_stop(StopRule::RseBelow(1e-6)).with_trace_stride(0);
    let mut spec = ExperimentSpec::new(
        ProblemSource::Random(RandomSpec::new(35, 60, 80, 20, 3)),
        vec![Method::Rbk, Method::Grbk, Method::Rgrbk, Method::Mwrbk],
        cfg,
    );
    spec.trials = 5;
    spec.thetas = vec![0.25, 0.75];
    print!("{}", format_summary_table(&run_trials(&spec)?));
    Ok(())
}
