//! Consistent equations have many solutions when `A` or `B` is rank deficient.
//! Starting from zero, block Kaczmarz converges to the minimum-norm one
//! `A^+ C B^+`; from any other start it converges to
//! `X* + X0 - A^+ A X0 B B^+`.

use axb_kaczmarz::analysis::x_star_0;
use axb_kaczmarz::harness::{randn, random_problem, RandomSpec};
use axb_kaczmarz::linalg::min_norm_solution;
use axb_kaczmarz::{solve, Method, SolverConfig, StopRule};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> axb_kaczmarz::Result<()> {
    // A = [A0, A0] and B = [B0; B0]: both rank deficient.
    let problem = random_problem(&RandomSpec::new(20, 6, 4, 5, 7).with_dup(true, true))?;
    let (m, p, q, n) = problem.dims();
    println!("A is {m}x{p}, B is {q}x{n}");

    let oracle = min_norm_solution(problem.a(), problem.b(), problem.c())?;
    let reference = problem.x_star().expect("random problems carry their oracle");
    println!("||A^+ C B^+ - X*||_F = {:.2e}", oracle.distance(reference));

    let cfg = SolverConfig::default().with_stop(StopRule::RseBelow(1e-10));
    let from_zero = solve(&problem, Method::Bk, &cfg)?;
    println!(
        "BK from zero:    {:>6} steps, distance to X* {:.2e}",
        from_zero.iterations,
        from_zero.x.distance(reference)
    );

    let x0 = randn(&mut ChaCha8Rng::seed_from_u64(3), p, q);
    let limit = x_star_0(&problem, &x0)?;
    let cfg = SolverConfig::default()
        .with_x0(x0)
        .with_stop(StopRule::ResidualFroBelow(1e-12 * problem.c().frobenius_norm()));
    let from_x0 = solve(&problem, Method::Bk, &cfg)?;
    println!(
        "BK from X0:      {:>6} steps, distance to X*   {:.2e}, to X*0 {:.2e}",
        from_x0.iterations,
        from_x0.x.distance(reference),
        from_x0.x.distance(&limit)
    );
    Ok(())
}
