//! Per-step convergence factors along a greedy run. `delta` is the uniform
//! factor of randomized block Kaczmarz; `delta_{k,theta}` uses the current
//! residual and is never larger.

use axb_kaczmarz::analysis::BoundContext;
use axb_kaczmarz::harness::{random_problem, RandomSpec};
use axb_kaczmarz::solvers::solve_observed;
use axb_kaczmarz::{Method, SolverConfig, StopRule};

fn main() -> axb_kaczmarz::Result<()> {
    let problem = random_problem(&RandomSpec::new(50, 15, 6, 8, 2))?;
    let ctx = BoundContext::new(problem.a(), problem.b())?;
    let theta = 0.5;
    let cfg = SolverConfig::default().with_theta(theta).with_stop(StopRule::RseBelow(1e-6)).with_seed(1);
    let alpha = 1.0 / problem.b_spectral_norm()?.powi(2);
    println!("delta = {:.8}", ctx.delta(alpha)?);

    let mut rows = Vec::new();
    let rep = solve_observed(&problem, Method::Rgrbk, &cfg, |e| {
        if e.k % 400 == 0 {
            if let Some(r) = e.residual_row_norms {
                if let Ok(b) = ctx.delta_k_theta(alpha, theta, r) {
                    rows.push((e.k, b.delta_k_theta, b.epsilon, b.omega_set.len()));
                }
            }
        }
    })?;
    println!("{:>6} {:>14} {:>8} {:>6}", "step", "delta_k_theta", "epsilon", "|Omega|");
    for (k, d, eps, omega) in rows {
        println!("{k:>6} {d:>14.8} {eps:>8.4} {omega:>6}");
    }
    println!("converged after {} steps", rep.iterations);

    // Larger theta never loosens the factor.
    let r: Vec<f64> = (0..problem.dims().0).map(|i| 1.0 + (i % 7) as f64).collect();
    for t in [0.0, 0.5, 1.0] {
        println!("theta {t}: delta_k_theta = {:.8}", ctx.delta_k_theta(alpha, t, &r)?.delta_k_theta);
    }
    Ok(())
}
