use std::borrow::Cow;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::DenseMat;
use crate::solvers::config::{Method, SolverConfig, StepSize, StopRule};
use crate::solvers::problem::Problem;
use crate::solvers::select::{
    cyclic_index, greedy_sample, greedy_threshold, mwrbk_select, RatioTree, RowSampler, SelectionDiagnostics,
};
use crate::solvers::steps::{
    gi_step_upper, gi_update, residual_row_step, row_step, transform_fullcol, transform_fullrow, IterateState,
};

/// Running `||X - X*||_F^2`. Row steps only change the rows of `X` in the
/// support of `A_i`, so the sum is patched locally and resynchronized
/// exactly once per sweep and before any stop decision.
struct ErrorTracker<'a> {
    xs: &'a DenseMat,
    /// `C - A X* B`; zero up to rounding for an exact reference.
    defect: DenseMat,
    xs_norm: f64,
    err_sq: f64,
    since_sync: usize,
    sync_every: usize,
    stash: Vec<f64>,
}

impl<'a> ErrorTracker<'a> {
    fn new(problem: &Problem, xs: &'a DenseMat, x: &DenseMat, sync_every: usize) -> Self {
        Self {
            xs,
            defect: problem.residual(xs),
            xs_norm: xs.frobenius_norm(),
            err_sq: x.distance(xs).powi(2),
            since_sync: 0,
            sync_every: sync_every.max(1),
            stash: Vec::new(),
        }
    }

    /// Keeps a copy of the residual row for [`Self::after_stashed_row`].
    fn stash(&mut self, r: &[f64]) {
        self.stash.clear();
        self.stash.extend_from_slice(r);
    }

    fn after_stashed_row(&mut self, x: &DenseMat, i: usize, coef: f64, upd: f64) {
        let r = std::mem::take(&mut self.stash);
        self.after_row(x, i, &r, coef, upd);
        self.stash = r;
    }

    fn sync(&mut self, x: &DenseMat) -> f64 {
        let d = x.distance(self.xs);
        self.err_sq = d * d;
        self.since_sync = 0;
        if self.xs_norm > 0.0 {
            d / self.xs_norm
        } else {
            d
        }
    }

    /// Row step on row `i` with step `coef = alpha / ||A_i||^2`, row residual
    /// `r = C_i - A_i X B` taken before the step and update norm `upd`:
    /// `||E + dE||^2 - ||E||^2 = 2 coef (<r, defect_i> - ||r||^2) + upd^2`.
    fn after_row(&mut self, x: &DenseMat, i: usize, r: &[f64], coef: f64, upd: f64) {
        self.since_sync += 1;
        if self.since_sync >= self.sync_every {
            self.sync(x);
        } else {
            let (rd, rr) = r
                .iter()
                .zip(self.defect.row(i))
                .fold((0.0, 0.0), |(rd, rr), (u, d)| (rd + u * d, rr + u * u));
            self.err_sq += 2.0 * coef * (rd - rr) + upd * upd;
        }
    }

    fn below(&mut self, x: &DenseMat, tol: f64) -> bool {
        let scale = if self.xs_norm > 0.0 { self.xs_norm } else { 1.0 };
        let bound = tol * scale;
        // Slack covers rounding drift of the patched sum between syncs.
        if self.err_sq > bound * bound * (1.0 + 1e-9) {
            return false;
        }
        self.sync(x) <= tol
    }
}

/// Why the iteration ended.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopReason {
    Converged(StopRule),
    /// The maintained (or computed) residual is exactly zero.
    ZeroResidual,
    MaxIters,
}

impl StopReason {
    pub fn converged(&self) -> bool {
        !matches!(self, StopReason::MaxIters)
    }
}

/// One traced step. `k` counts completed steps.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub row: Option<usize>,
    pub rse: Option<f64>,
    pub res_fro: Option<f64>,
    pub wall_s: Option<f64>,
}

/// Outcome of a solve.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub method: Method,
    pub x: DenseMat,
    pub iterations: usize,
    pub stop: StopReason,
    pub trace: Vec<TraceRecord>,
    /// Time spent in the iteration loop, excluding tracing and observers.
    pub wall_seconds: f64,
    /// Step size actually used.
    pub alpha: f64,
    pub final_rse: Option<f64>,
    /// `||C - A X B||_F` on the original equation.
    pub final_residual_fro: f64,
}

/// What an observer sees after every step.
#[derive(Debug)]
pub struct StepEvent<'a> {
    /// Steps completed, including this one.
    pub k: usize,
    pub row: Option<usize>,
    pub x: &'a DenseMat,
    /// Maintained `||R_i||^2` after the step (greedy methods only).
    pub residual_row_norms: Option<&'a [f64]>,
    /// Threshold and candidates used to pick `row` (`Grbk`/`Rgrbk` only).
    pub selection: Option<&'a SelectionDiagnostics>,
    pub update_norm: f64,
}

/// Runs `method` on `problem`.
pub fn solve(problem: &Problem, method: Method, config: &SolverConfig) -> Result<SolveReport> {
    solve_observed(problem, method, config, |_| {})
}

/// Resolves the step size and checks it against the admissible interval.
/// For the full-rank variants the bound refers to the transformed `B`, whose
/// spectral norm is one.
pub fn resolve_alpha(problem: &Problem, method: Method, alpha: StepSize) -> Result<f64> {
    let (auto, upper) = match method {
        Method::Gi => {
            let upper = gi_step_upper(problem)?;
            (upper / 2.0, upper)
        }
        Method::BkFullCol | Method::BkFullRow => (1.0, 2.0),
        _ => {
            let bn = problem.b_spectral_norm()?;
            (1.0 / (bn * bn), 2.0 / (bn * bn))
        }
    };
    match alpha {
        StepSize::Auto => Ok(auto),
        StepSize::Fixed(a) if a > 0.0 && a < upper => Ok(a),
        StepSize::Fixed(a) => Err(Error::StepSize { alpha: a, upper }),
    }
}

/// Like [`solve`], calling `observer` after every step.
pub fn solve_observed<F>(problem: &Problem, method: Method, config: &SolverConfig, mut observer: F) -> Result<SolveReport>
where
    F: FnMut(&StepEvent<'_>),
{
    config.validate()?;
    let work: Cow<'_, Problem> = match method {
        Method::BkFullCol => Cow::Owned(transform_fullcol(problem)?.0),
        Method::BkFullRow => Cow::Owned(transform_fullrow(problem)?),
        _ => Cow::Borrowed(problem),
    };
    let work = work.as_ref();
    let alpha = resolve_alpha(work, method, config.alpha)?;
    if matches!(config.stop, StopRule::RseBelow(_)) && problem.x_star().is_none() {
        return Err(Error::Invalid("the rse stopping rule needs a reference solution".into()));
    }
    let update_tol = match config.stop {
        StopRule::DefaultUpdateNorm => {
            Some(1e-8 * problem.c().frobenius_norm() / problem.a_fro_sq().sqrt())
        }
        StopRule::UpdateNormBelow(t) => Some(t),
        _ => None,
    };
    let rse_tol = match config.stop {
        StopRule::RseBelow(t) => Some(t),
        _ => None,
    };
    let res_tol = match config.stop {
        StopRule::ResidualFroBelow(t) => Some(t),
        _ => None,
    };

    let m = work.dims().0;
    let greedy = method.is_greedy();
    let mut state = if greedy {
        IterateState::with_residual(work, config.x0.clone())?
    } else {
        IterateState::new(work, config.x0.clone())?
    };
    let gram = greedy.then(|| work.a().gram());
    let sampler = match method {
        Method::Rbk => Some(RowSampler::new(work.row_norms_squared())?),
        _ => None,
    };
    let theta = match method {
        Method::Rgrbk => config.theta,
        _ => 0.5,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let stride = config.trace_stride();
    let refresh = config.residual_refresh_every;

    let mut tracker = match (rse_tol, work.x_star()) {
        (Some(_), Some(xs)) => Some(ErrorTracker::new(work, xs, &state.x, m)),
        _ => None,
    };
    let mut ratio_tree = (method == Method::Mwrbk)
        .then(|| RatioTree::new(state.residual_row_norms().unwrap_or(&[]), work.row_norms_squared()));

    let mut trace = Vec::new();
    let mut elapsed = Duration::ZERO;
    let mut stop = StopReason::MaxIters;
    let trace_record = |state: &IterateState, elapsed: Duration| TraceRecord {
        k: state.k,
        row: state.last_row,
        rse: work.rse(&state.x),
        res_fro: Some(match state.residual_fro_sq() {
            Some(s) => s.sqrt(),
            None => work.residual(&state.x).frobenius_norm(),
        }),
        wall_s: Some(elapsed.as_secs_f64()),
    };

    while state.k < config.max_iters {
        let t0 = Instant::now();
        if let (Some(t), Some(tr)) = (rse_tol, tracker.as_mut()) {
            if tr.below(&state.x, t) {
                stop = StopReason::Converged(config.stop);
                elapsed += t0.elapsed();
                break;
            }
        }
        let mut selection = None;
        let update = match method {
            Method::Bk | Method::BkFullCol | Method::BkFullRow | Method::Rbk => {
                if let Some(t) = res_tol {
                    if state.k % m == 0 && work.residual(&state.x).frobenius_norm() <= t {
                        stop = StopReason::Converged(config.stop);
                        elapsed += t0.elapsed();
                        break;
                    }
                }
                let row = match &sampler {
                    Some(s) => s.sample(&mut rng),
                    None => cyclic_index(state.k, m),
                };
                let upd = row_step(&mut state, work, row, alpha)?;
                if let Some(tr) = tracker.as_mut() {
                    let coef = alpha / work.row_norms_squared()[row];
                    tr.after_row(&state.x, row, state.last_row_residual(work), coef, upd);
                }
                upd
            }
            Method::Grbk | Method::Rgrbk | Method::Mwrbk => {
                if res_tol.is_some_and(|t| state.residual_fro_sq().unwrap_or(0.0).sqrt() <= t) {
                    stop = StopReason::Converged(config.stop);
                    elapsed += t0.elapsed();
                    break;
                }
                let picked = if let Some(tree) = &ratio_tree {
                    tree.argmax()
                } else if method == Method::Mwrbk {
                    mwrbk_select(&state, work)
                } else {
                    greedy_threshold(&state, work, theta).map(|d| {
                        let row = greedy_sample(&mut rng, &d);
                        selection = Some(d);
                        row
                    })
                };
                let row = match picked {
                    Ok(row) => row,
                    Err(Error::ZeroResidual) => {
                        stop = StopReason::ZeroResidual;
                        elapsed += t0.elapsed();
                        break;
                    }
                    Err(e) => return Err(e),
                };
                let gram = gram.as_ref().expect("greedy methods build the Gram matrix");
                if let (Some(tr), Some(r)) = (tracker.as_mut(), state.residual()) {
                    tr.stash(r.row(row));
                }
                let upd = residual_row_step(&mut state, work, gram, row, alpha)?;
                if let Some(tr) = tracker.as_mut() {
                    let coef = alpha / work.row_norms_squared()[row];
                    tr.after_stashed_row(&state.x, row, coef, upd);
                }
                let refreshed = refresh > 0 && state.k % refresh == 0;
                if refreshed {
                    state.refresh_residual(work);
                }
                if let Some(tree) = ratio_tree.as_mut() {
                    let norms = state.residual_row_norms()?;
                    let a_norms = work.row_norms_squared();
                    if refreshed {
                        *tree = RatioTree::new(norms, a_norms);
                    } else {
                        tree.update_many(gram.row(row).iter().map(|(j, _)| j), norms, a_norms);
                    }
                }
                upd
            }
            Method::Gi => {
                let r = work.residual(&state.x);
                let res = r.frobenius_norm();
                if res_tol.is_some_and(|t| res <= t) {
                    stop = StopReason::Converged(config.stop);
                    elapsed += t0.elapsed();
                    break;
                }
                if res == 0.0 {
                    stop = StopReason::ZeroResidual;
                    elapsed += t0.elapsed();
                    break;
                }
                let upd = gi_update(&mut state, work, alpha, &r);
                if let Some(tr) = tracker.as_mut() {
                    tr.sync(&state.x);
                }
                upd
            }
        };
        elapsed += t0.elapsed();

        observer(&StepEvent {
            k: state.k,
            row: state.last_row,
            x: &state.x,
            residual_row_norms: state.residual_row_norms().ok(),
            selection: selection.as_ref(),
            update_norm: update,
        });
        if stride > 0 && state.k % stride == 0 {
            trace.push(trace_record(&state, elapsed));
        }
        if update_tol.is_some_and(|t| update <= t) {
            stop = StopReason::Converged(config.stop);
            break;
        }
    }
    if trace.last().is_none_or(|r: &TraceRecord| r.k != state.k) {
        trace.push(trace_record(&state, elapsed));
    }

    let final_residual_fro = problem.residual(&state.x).frobenius_norm();
    Ok(SolveReport {
        method,
        final_rse: problem.rse(&state.x),
        x: state.x,
        iterations: state.k,
        stop,
        trace,
        wall_seconds: elapsed.as_secs_f64(),
        alpha,
        final_residual_fro,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparseRowMat;

    fn small() -> Problem {
        let a = SparseRowMat::from_dense(&DenseMat::from_fn(6, 4, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5));
        let b = DenseMat::from_fn(3, 5, |i, j| ((i * 2 + j * 5) % 7) as f64 - 2.0);
        let x = DenseMat::from_fn(4, 3, |i, j| (i as f64 - j as f64) * 0.3);
        let c = a.mul_dense(&x).matmul(&b);
        Problem::new(a, b, c).unwrap().with_min_norm_oracle().unwrap()
    }

    #[test]
    fn every_method_reaches_the_oracle() {
        let p = small();
        let cfg = SolverConfig::default().with_stop(StopRule::RseBelow(1e-8));
        for method in Method::ALL {
            if method == Method::BkFullCol {
                // B is 3x5 here, so it has no full column rank.
                assert!(solve(&p, method, &cfg).is_err());
                continue;
            }
            let rep = solve(&p, method, &cfg).unwrap();
            assert!(rep.stop.converged(), "{method}: {:?}", rep.stop);
            assert!(rep.final_rse.unwrap() <= 1e-8, "{method}");
        }
    }

    #[test]
    fn trace_length_and_last_record() {
        let p = small();
        let cfg = SolverConfig::default().with_max_iters(40).with_trace_stride(7).with_stop(StopRule::UpdateNormBelow(0.0));
        let rep = solve(&p, Method::Bk, &cfg).unwrap();
        assert_eq!(rep.iterations, 40);
        assert_eq!(rep.stop, StopReason::MaxIters);
        let ks: Vec<usize> = rep.trace.iter().map(|r| r.k).collect();
        assert_eq!(ks, vec![7, 14, 21, 28, 35, 40]);
        let rep = solve(&p, Method::Bk, &cfg.clone().with_trace_stride(0)).unwrap();
        assert_eq!(rep.trace.len(), 1);
    }

    #[test]
    fn step_size_is_checked() {
        let p = small();
        let bn = p.b_spectral_norm().unwrap();
        let cfg = SolverConfig::default().with_alpha(StepSize::Fixed(2.0 / (bn * bn)));
        assert!(matches!(solve(&p, Method::Bk, &cfg), Err(Error::StepSize { .. })));
        let p = Problem::new(SparseRowMat::identity(2), DenseMat::identity(2), DenseMat::identity(2)).unwrap();
        let cfg = SolverConfig::default().with_alpha(StepSize::Fixed(3.0));
        assert!(solve(&p, Method::Rbk, &cfg).is_err());
    }

    #[test]
    fn rse_rule_requires_reference() {
        let p = Problem::new(SparseRowMat::identity(2), DenseMat::identity(2), DenseMat::identity(2)).unwrap();
        let cfg = SolverConfig::default().with_stop(StopRule::RseBelow(1e-8));
        assert!(solve(&p, Method::Bk, &cfg).is_err());
        let rep = solve(&p, Method::Mwrbk, &SolverConfig::default()).unwrap();
        assert_eq!(rep.stop, StopReason::ZeroResidual);
        assert_eq!(rep.x, DenseMat::identity(2));
    }
}
