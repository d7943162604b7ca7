//! Cyclic (BK) and randomized (RBK) block Kaczmarz on a dense random problem,
//! with a sweep over the step size. The bound `delta(alpha)` is smallest at
//! `alpha = 1 / ||B||^2`, which is also the default.

use axb_kaczmarz::analysis::BoundContext;
use axb_kaczmarz::harness::{random_problem, RandomSpec};
use axb_kaczmarz::{solve, Method, SolverConfig, StepSize, StopRule};

fn main() -> axb_kaczmarz::Result<()> {
    let problem = random_problem(&RandomSpec::new(60, 20, 8, 10, 1))?;
    let bounds = BoundContext::new(problem.a(), problem.b())?;
    let alpha_star = 1.0 / problem.b_spectral_norm()?.powi(2);

    println!("{:>10} {:>12} {:>10} {:>10}", "alpha", "delta", "BK IT", "RBK IT");
    for scale in [0.25, 0.5, 1.0, 1.5, 1.9] {
        let alpha = scale * alpha_star;
        let cfg = SolverConfig::default()
            .with_alpha(StepSize::Fixed(alpha))
            .with_stop(StopRule::RseBelow(1e-6))
            .with_max_iters(2_000_000);
        let bk = solve(&problem, Method::Bk, &cfg)?;
        let rbk = solve(&problem, Method::Rbk, &cfg.clone().with_seed(5))?;
        println!("{alpha:>10.4} {:>12.8} {:>10} {:>10}", bounds.delta(alpha)?, bk.iterations, rbk.iterations);
    }
    Ok(())
}
