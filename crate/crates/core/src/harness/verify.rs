//! Desk-scale invariant suite behind `axb verify`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{self, BoundContext, BoundReport};
use crate::error::Result;
use crate::harness::random::{randn, random_problem, RandomSpec};
use crate::linalg::{self, DenseMat, SparseRowMat};
use crate::solvers::{
    self, greedy_sample, greedy_threshold_from_norms, mwrbk_select_from_norms, row_step, solve, solve_observed,
    IterateState, Method, Problem, SolverConfig, StepSize, StopRule,
};

/// Outcome of one invariant.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    /// Bound reports of the sampled residual states.
    pub bounds: Vec<BoundReport>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// CSV of bound reports: `theta,alpha,delta,delta_k_theta,varphi_k_theta,epsilon,omega_size,degenerate`.
pub fn bounds_csv(bounds: &[BoundReport]) -> String {
    let mut s = String::from("theta,alpha,delta,delta_k_theta,varphi_k_theta,epsilon,omega_size,degenerate\n");
    for b in bounds {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
            b.theta,
            b.alpha,
            b.delta,
            b.delta_k_theta,
            b.varphi_k_theta,
            b.epsilon,
            b.omega_set.len(),
            b.degenerate
        );
    }
    s
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    match f() {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn sparse_randn(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> SparseRowMat {
    SparseRowMat::from_dense(&randn(rng, rows, cols))
}

fn orthonormal_columns(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Result<DenseMat> {
    Ok(linalg::qr_thin(&randn(rng, rows, cols))?.q)
}

/// Runs every invariant with generators derived from `seed`.
pub fn run_verify(seed: u64) -> VerifyReport {
    let mut bounds = Vec::new();
    let mut checks = Vec::new();
    let alphas: Vec<f64> = (0..10).map(|i| 0.1 + 0.2 * i as f64).collect();

    checks.push(check("bound_ordering", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = sparse_randn(&mut rng, 12, 6);
        let b = randn(&mut rng, 4, 5);
        let ctx = BoundContext::new(&a, &b)?;
        let alpha = 1.0 / ctx.b_norm.powi(2);
        let delta = ctx.delta(alpha)?;
        let mut worst = String::new();
        for s in 0..200 {
            let r: Vec<f64> = (0..12).map(|_| rng.random::<f64>().powi(3) + 1e-3).collect();
            let mut prev = f64::INFINITY;
            for t in 0..=10 {
                let theta = t as f64 / 10.0;
                let rep = ctx.delta_k_theta(alpha, theta, &r)?;
                let strict = rep.epsilon < 1.0 && t > 0;
                let ok = rep.delta_k_theta <= prev
                    && (!strict || rep.delta_k_theta < prev)
                    && rep.delta_k_theta <= delta
                    && (t != 0 || rep.delta_k_theta == delta)
                    && rep.varphi_k_theta >= 1.0 / ctx.a_fro_sq;
                if !ok && worst.is_empty() {
                    worst = format!("state {s}, theta {theta}: {rep:?}");
                }
                prev = rep.delta_k_theta;
                if s < 5 && t % 5 == 0 {
                    bounds.push(rep);
                }
            }
        }
        Ok((worst.is_empty(), if worst.is_empty() { format!("200 states, delta = {delta:.6}") } else { worst }))
    }));

    checks.push(check("delta_minimized_at_inverse_b_norm", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
        let a = sparse_randn(&mut rng, 10, 4);
        let b = randn(&mut rng, 3, 6);
        let ctx = BoundContext::new(&a, &b)?;
        let opt = 1.0 / ctx.b_norm.powi(2);
        let grid: Vec<f64> = (1..40).map(|i| i as f64 * 0.05 * opt).collect();
        let vals: Vec<f64> = grid.iter().map(|&al| ctx.delta(al)).collect::<Result<_>>()?;
        let argmin = (0..grid.len()).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap_or(0);
        let nearest = (0..grid.len())
            .min_by(|&i, &j| (grid[i] - opt).abs().total_cmp(&(grid[j] - opt).abs()))
            .unwrap_or(0);
        Ok((argmin == nearest, format!("argmin alpha {:.4}, 1/||B||^2 = {opt:.4}", grid[argmin])))
    }));

    checks.push(check("spectral_radius_fullrow", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 2);
        let tall = sparse_randn(&mut rng, 9, 5);
        let wide = sparse_randn(&mut rng, 5, 9);
        let orth = SparseRowMat::from_dense(&orthonormal_columns(&mut rng, 6, 6)?);
        let mut worst: f64 = 0.0;
        let mut orth_err: f64 = 0.0;
        for &al in &alphas {
            worst = worst.max(analysis::spectral_radius_fullrow(&tall, al)?);
            worst = worst.max(analysis::restricted_spectral_radius_fullrow(&wide, al)?);
            orth_err = orth_err.max((analysis::spectral_radius_fullrow(&orth, al)? - (1.0 - al).abs()).abs());
        }
        Ok((worst < 1.0 && orth_err <= 1e-10, format!("max rho {worst:.6}, orthonormal deviation {orth_err:.2e}")))
    }));

    checks.push(check("restricted_spectral_radius_fullcol", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 3);
        let a = sparse_randn(&mut rng, 7, 5);
        let q = orthonormal_columns(&mut rng, 5, 3)?;
        let mut worst: f64 = 0.0;
        for &al in &alphas {
            worst = worst.max(analysis::restricted_spectral_radius_fullcol(&a, &q, al)?);
        }
        let unrestricted = analysis::spectral_radius_fullcol(&a, &q, 1.0)?;
        Ok((
            worst < 1.0 && (unrestricted - 1.0).abs() < 1e-10,
            format!("max restricted rho {worst:.6}, unrestricted {unrestricted:.12}"),
        ))
    }));

    checks.push(check("sweep_formula", || {
        let mut worst: f64 = 0.0;
        for (k, (q, n)) in [(6usize, 4usize), (4, 6)].into_iter().enumerate() {
            let p = random_problem(&RandomSpec::new(8, 5, q, n, seed + 10 + k as u64))?;
            let t = if q >= n { solvers::transform_fullcol(&p)?.0 } else { solvers::transform_fullrow(&p)? };
            let sweep = analysis::build_sweep_operator(t.a(), 1.0)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 20 + k as u64);
            let x0 = randn(&mut rng, 5, q);
            let formula = solvers::sweep_formula_step(&x0, &t, &sweep)?;
            let mut st = IterateState::new(&t, Some(x0))?;
            for i in 0..8 {
                row_step(&mut st, &t, i, 1.0)?;
            }
            worst = worst.max(formula.distance(&st.x) / st.x.frobenius_norm());
        }
        Ok((worst <= 1e-10, format!("max relative deviation {worst:.2e}")))
    }));

    checks.push(check("fullcol_fullrow_equivalence", || {
        let p = random_problem(&RandomSpec::new(9, 5, 4, 4, seed + 30))?;
        let cfg = SolverConfig::default().with_max_iters(300).with_stop(StopRule::UpdateNormBelow(0.0));
        let mut a_iter = Vec::new();
        solve_observed(&p, Method::BkFullCol, &cfg, |e| a_iter.push(e.x.clone()))?;
        let mut worst: f64 = 0.0;
        let mut k = 0;
        solve_observed(&p, Method::BkFullRow, &cfg, |e| {
            worst = worst.max(e.x.distance(&a_iter[k]) / (1.0 + a_iter[k].frobenius_norm()));
            k += 1;
        })?;
        Ok((worst <= 1e-10 && k == a_iter.len(), format!("{k} steps, max deviation {worst:.2e}")))
    }));

    checks.push(check("bk_limit_point", || {
        let p = random_problem(&RandomSpec::new(8, 10, 6, 4, seed + 40).with_dup(true, true))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 41);
        let x0 = randn(&mut rng, 10, 6);
        let target = analysis::x_star_0(&p, &x0)?;
        let cfg = SolverConfig::default()
            .with_x0(x0)
            .with_stop(StopRule::ResidualFroBelow(1e-12 * p.c().frobenius_norm()));
        let rep = solve(&p, Method::Bk, &cfg)?;
        let err = rep.x.distance(&target);
        Ok((err <= 1e-6, format!("{} steps, distance to limit {err:.2e}", rep.iterations)))
    }));

    checks.push(check("residual_recurrence", || {
        let p = random_problem(&RandomSpec::new(20, 10, 4, 6, seed + 50))?;
        let g = p.a().gram();
        let bn = p.b_spectral_norm()?;
        let mut st = IterateState::with_residual(&p, None)?;
        for _ in 0..10_000 {
            let i = mwrbk_select_from_norms(st.residual_row_norms()?, p.row_norms_squared())?;
            solvers::residual_row_step(&mut st, &p, &g, i, 1.0 / (bn * bn))?;
        }
        let drift = st.refresh_residual(&p);
        let tol = 1e-8 * (1.0 + p.c().frobenius_norm());
        Ok((drift <= tol, format!("drift {drift:.2e} (tolerance {tol:.2e})")))
    }));

    checks.push(check("candidate_soundness", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 60);
        let a_norms: Vec<f64> = (0..15).map(|_| 0.1 + rng.random::<f64>()).collect();
        let fro: f64 = a_norms.iter().sum();
        let mut bad = 0;
        for _ in 0..20_000 {
            let r: Vec<f64> = (0..15).map(|_| rng.random::<f64>().powi(4)).collect();
            let theta = rng.random::<f64>();
            let d = greedy_threshold_from_norms(&r, &a_norms, fro, theta)?;
            let argmax = mwrbk_select_from_norms(&r, &a_norms)?;
            let d1 = greedy_threshold_from_norms(&r, &a_norms, fro, 1.0)?;
            let ok = !d.candidates.is_empty()
                && d.candidates.contains(&argmax)
                && d1.candidates.contains(&argmax)
                && d1.candidates.iter().all(|&i| r[i] / a_norms[i] == d1.max_ratio)
                && d.candidates.contains(&greedy_sample(&mut rng, &d));
            bad += usize::from(!ok);
        }
        Ok((bad == 0, format!("{bad} violations in 20000 states")))
    }));

    checks.push(check("oracle_convergence_and_monotonicity", || {
        let p = random_problem(&RandomSpec::new(14, 6, 5, 5, seed + 70))?;
        let xs = p.x_star().cloned().unwrap_or_else(|| DenseMat::zeros(6, 5));
        let cfg = SolverConfig::default().with_stop(StopRule::RseBelow(1e-8)).with_trace_stride(0);
        let mut detail = String::new();
        let mut ok = true;
        for m in Method::ALL {
            let mut prev = xs.frobenius_norm();
            let mut mono = true;
            let rep = solve_observed(&p, m, &cfg, |e| {
                let d = e.x.distance(&xs);
                mono &= d <= prev + 1e-12;
                prev = d;
            })?;
            let conv = rep.final_rse.is_some_and(|e| e <= 1e-8);
            let mono_required = !matches!(m, Method::Gi | Method::BkFullCol | Method::BkFullRow);
            if !conv || (mono_required && !mono) {
                ok = false;
                let _ = write!(detail, "{m} failed (rse {:?}, monotone {mono}); ", rep.final_rse);
            }
        }
        if ok {
            detail = "all methods reached rse 1e-8".into();
        }
        Ok((ok, detail))
    }));

    checks.push(check("step_size_guard", || {
        let p = Problem::new(SparseRowMat::identity(2), DenseMat::identity(2), DenseMat::identity(2))?;
        let cfg = SolverConfig::default().with_alpha(StepSize::Fixed(3.0));
        Ok((solve(&p, Method::Bk, &cfg).is_err(), "alpha = 3 rejected for ||B|| = 1".into()))
    }));

    VerifyReport { checks, bounds }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let rep = run_verify(2024);
        for c in &rep.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
        assert!(bounds_csv(&rep.bounds).lines().count() > 1);
    }
}
