//! When `B` has full column rank, `A X B = C` is equivalent to
//! `A X Q = C R^{-1}` with `B = Q R`; when it has full row rank, to
//! `A X = C B^T (B B^T)^{-1}`. For a square nonsingular `B` both cyclic
//! variants produce the same iterates.

use axb_kaczmarz::harness::{random_problem, RandomSpec};
use axb_kaczmarz::solvers::solve_observed;
use axb_kaczmarz::{solve, Method, SolverConfig, StopRule};

fn main() -> axb_kaczmarz::Result<()> {
    let problem = random_problem(&RandomSpec::new(40, 12, 6, 6, 11))?;
    let cfg = SolverConfig::default().with_stop(StopRule::RseBelow(1e-8)).with_trace_stride(0);

    for method in [Method::Bk, Method::BkFullCol, Method::BkFullRow] {
        let rep = solve(&problem, method, &cfg)?;
        println!("{:<10} {:>7} steps  alpha {:.4}  rse {:.2e}", method.name(), rep.iterations, rep.alpha, rep.final_rse.unwrap());
    }

    let mut col = Vec::new();
    solve_observed(&problem, Method::BkFullCol, &cfg, |e| col.push(e.x.clone()))?;
    let mut worst: f64 = 0.0;
    let mut k = 0;
    solve_observed(&problem, Method::BkFullRow, &cfg, |e| {
        worst = worst.max(e.x.distance(&col[k]));
        k += 1;
    })?;
    println!("largest iterate difference between the two transforms: {worst:.2e}");
    Ok(())
}
