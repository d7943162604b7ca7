//! Property tests against independent nalgebra computations.

mod common;

use axb_kaczmarz::analysis::BoundContext;
use axb_kaczmarz::linalg::{kron_small, min_norm_solution, vec};
use axb_kaczmarz::solvers::{greedy_threshold, solve_observed, IterateState, RowSampler};
use axb_kaczmarz::{solve, DenseMat, Method, Problem, SolverConfig, SparseRowMat, StopRule};
use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rank_strategy() -> impl Strategy<Value = Rank> {
    prop_oneof![Just(Rank::FullColumn), Just(Rank::FullRow), Just(Rank::Deficient)]
}

fn problem_for(seed: u64, ra: Rank, rb: Rank) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_factor(&mut rng, ra, true);
    let b = random_factor(&mut rng, rb, false);
    oracle_problem(&mut rng, a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn vec_of_product_is_kronecker_action(seed in any::<u64>(), m in 1usize..6, p in 1usize..6, q in 1usize..6, n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, x, b) = (gaussian(&mut rng, m, p), gaussian(&mut rng, p, q), gaussian(&mut rng, q, n));
        let lhs = vec(&a.matmul(&x).matmul(&b));
        let k = to_na(&kron_small(&b.transpose(), &a).unwrap());
        let rhs = k * nalgebra::DVector::from_vec(vec(&x));
        for (l, r) in lhs.iter().zip(rhs.iter()) {
            prop_assert!((l - r).abs() <= 1e-12 * (1.0 + r.abs()));
        }
    }

    #[test]
    fn min_norm_solution_matches_pseudoinverse(seed in any::<u64>(), ra in rank_strategy(), rb in rank_strategy()) {
        let p = problem_for(seed, ra, rb);
        let got = min_norm_solution(p.a(), p.b(), p.c()).unwrap();
        prop_assert!(rel_dist(&got, p.x_star().unwrap()) <= 1e-9);
    }

    #[test]
    fn min_norm_solution_is_shortest(seed in any::<u64>(), ra in rank_strategy(), rb in rank_strategy()) {
        let p = problem_for(seed, ra, rb);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let (an, bn) = (sparse_to_na(p.a()), to_na(p.b()));
        let z = to_na(&gaussian(&mut rng, an.ncols(), bn.nrows()));
        // Adding anything annihilated by X -> A X B keeps a solution.
        let null = &z - pinv(&an) * &an * &z * &bn * pinv(&bn);
        let xs = to_na(p.x_star().unwrap());
        let other = &xs + &null;
        prop_assert!((&an * &other * &bn - to_na(p.c())).norm() <= 1e-8 * (1.0 + to_na(p.c()).norm()));
        prop_assert!(other.norm() >= xs.norm() - 1e-9);
    }

    #[test]
    fn row_scaling_leaves_cyclic_iterates_unchanged(seed in any::<u64>(), ra in rank_strategy(), rb in rank_strategy()) {
        let p = problem_for(seed, ra, rb);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let d: Vec<f64> = (0..p.dims().0).map(|_| rng.random_range(0.1..10.0)).collect();
        let s = p.scale_rows(&d).unwrap();
        let cfg = SolverConfig::default().with_max_iters(3 * p.dims().0).with_stop(StopRule::UpdateNormBelow(0.0));
        // Randomized methods sample by ||A_i||^2 or ||R_i||^2, which do scale.
        for m in [Method::Bk, Method::Mwrbk] {
            let r1 = solve(&p, m, &cfg).unwrap();
            let r2 = solve(&s, m, &cfg).unwrap();
            prop_assert!(rel_dist(&r1.x, &r2.x) <= 1e-12, "{m}: {}", rel_dist(&r1.x, &r2.x));
        }
    }

    #[test]
    fn rbk_probabilities_follow_row_norms(seed in any::<u64>(), m in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<f64> = (0..m).map(|_| rng.random_range(0.01..5.0)).collect();
        let total: f64 = w.iter().sum();
        let probs = RowSampler::new(&w).unwrap().probabilities();
        for (p, wi) in probs.iter().zip(&w) {
            prop_assert!((p - wi / total).abs() <= 1e-14);
        }
    }

    #[test]
    fn greedy_candidates_follow_permutation(seed in any::<u64>(), ra in rank_strategy(), rb in rank_strategy(), theta in 0.0f64..=1.0) {
        let p = problem_for(seed, ra, rb);
        let m = p.dims().0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let mut perm: Vec<usize> = (0..m).collect();
        for i in (1..m).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let pp = p.permute_rows(&perm).unwrap();
        let x = gaussian(&mut rng, p.dims().1, p.dims().2);
        let g0 = greedy_threshold(&IterateState::with_residual(&p, Some(x.clone())).unwrap(), &p, theta).unwrap();
        let g1 = greedy_threshold(&IterateState::with_residual(&pp, Some(x)).unwrap(), &pp, theta).unwrap();
        let mut mapped: Vec<usize> = g1.candidates.iter().map(|&k| perm[k]).collect();
        mapped.sort_unstable();
        prop_assert_eq!(mapped, g0.candidates);
    }

    #[test]
    fn greedy_steps_never_increase_the_error(seed in any::<u64>(), ra in rank_strategy(), rb in rank_strategy(), theta in 0.0f64..=1.0) {
        let p = problem_for(seed, ra, rb);
        let xs = p.x_star().unwrap().clone();
        let cfg = SolverConfig::default().with_theta(theta).with_seed(seed).with_max_iters(2000);
        let mut prev = xs.frobenius_norm();
        let mut worst = f64::NEG_INFINITY;
        solve_observed(&p, Method::Rgrbk, &cfg, |e| {
            let d = e.x.distance(&xs);
            worst = worst.max(d - prev);
            prev = d;
        }).unwrap();
        prop_assert!(worst <= 1e-12);
    }
}

/// Averaged over many runs, the squared RBK error after `k` steps stays below
/// `delta^k` times the initial one.
#[test]
fn randomized_error_contracts_in_expectation() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let a = gaussian(&mut rng, 12, 3);
    let b = gaussian(&mut rng, 3, 3);
    let p = oracle_problem(&mut rng, a, b);
    let alpha = 1.0 / spectral_norm(&to_na(p.b())).powi(2);
    let delta = BoundContext::new(p.a(), p.b()).unwrap().delta(alpha).unwrap();
    let xs = p.x_star().unwrap();
    let e0 = xs.frobenius_norm().powi(2);
    let steps = [10usize, 50, 200];
    let runs = 400;
    let mut mean = [0.0; 3];
    for s in 0..runs {
        let mut errs = [0.0; 3];
        let cfg = SolverConfig::default().with_seed(s).with_max_iters(200).with_stop(StopRule::UpdateNormBelow(0.0));
        solve_observed(&p, Method::Rbk, &cfg, |e| {
            if let Some(j) = steps.iter().position(|&k| k == e.k + 1) {
                errs[j] = e.x.distance(xs).powi(2);
            }
        })
        .unwrap();
        for j in 0..3 {
            mean[j] += errs[j] / runs as f64;
        }
    }
    for (j, &k) in steps.iter().enumerate() {
        assert!(mean[j] <= delta.powi(k as i32) * e0 * 1.1, "k = {k}: {} vs {}", mean[j], delta.powi(k as i32) * e0);
    }
}

/// Cyclic iterates from zero stay in the row space of `A` (left) and the
/// column space of `B` (right).
#[test]
fn iterates_stay_in_the_solution_subspace() {
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    for (ra, rb) in configurations() {
        let a = random_factor(&mut rng, ra, true);
        let b = random_factor(&mut rng, rb, false);
        let p = oracle_problem(&mut rng, a, b);
        let (an, bn) = (sparse_to_na(p.a()), to_na(p.b()));
        let pa = pinv(&an) * &an;
        let pb = &bn * pinv(&bn);
        let cfg = SolverConfig::default().with_max_iters(500).with_stop(StopRule::UpdateNormBelow(0.0));
        for m in [Method::Bk, Method::Rbk, Method::Mwrbk, Method::Gi] {
            let x = to_na(&solve(&p, m, &cfg).unwrap().x);
            let off = (&x - &pa * &x * &pb).norm();
            assert!(off <= 1e-10 * (1.0 + x.norm()), "{ra:?}/{rb:?} {m}: {off:.2e}");
        }
    }
}

#[test]
fn sparse_and_dense_storage_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(79);
    let d = DenseMat::from_fn(9, 7, |_, _| if rng.random::<f64>() < 0.3 { rng.random_range(-2.0..2.0) } else { 0.0 });
    let s = SparseRowMat::from_dense(&d);
    assert_eq!(s.to_dense().as_slice(), d.as_slice());
    let x = gaussian(&mut rng, 7, 4);
    let want: DMatrix<f64> = to_na(&d) * to_na(&x);
    assert!((to_na(&s.mul_dense(&x)) - want).norm() <= 1e-13);
    let g = to_na(&s.gram().to_dense());
    assert!((g - to_na(&d) * to_na(&d).transpose()).norm() <= 1e-13);
}
