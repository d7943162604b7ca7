//! Greedy row selection. At each step only rows whose weighted residual
//! `||R_i||^2 / ||A_i||^2` reaches `theta * max + (1 - theta) * average` are
//! eligible; `theta = 1` leaves only the maximal row.

use axb_kaczmarz::harness::{random_problem, RandomSpec};
use axb_kaczmarz::solvers::{greedy_threshold, IterateState};
use axb_kaczmarz::{solve, Method, SolverConfig, StopRule};

fn main() -> axb_kaczmarz::Result<()> {
    let problem = random_problem(&RandomSpec::new(35, 60, 80, 20, 4))?;
    let m = problem.dims().0;

    let state = IterateState::with_residual(&problem, None)?;
    for theta in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let d = greedy_threshold(&state, &problem, theta)?;
        println!("theta {theta:<4}  threshold {:.4e}  {:>2} of {m} rows eligible", d.threshold, d.candidates.len());
    }

    let cfg = SolverConfig::default().with_stop(StopRule::RseBelow(1e-6)).with_seed(9).with_trace_stride(0);
    for (method, theta) in [
        (Method::Rbk, 0.5),
        (Method::Grbk, 0.5),
        (Method::Rgrbk, 0.25),
        (Method::Rgrbk, 0.75),
        (Method::Mwrbk, 1.0),
    ] {
        let rep = solve(&problem, method, &cfg.clone().with_theta(theta))?;
        println!("{:<6} theta {theta:<4} {:>7} steps  {:.3} s", method.name(), rep.iterations, rep.wall_seconds);
    }
    Ok(())
}
