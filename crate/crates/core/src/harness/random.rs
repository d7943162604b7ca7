use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{DenseMat, SparseRowMat};
use crate::solvers::Problem;

/// Shape and seed of a random consistent problem.
///
/// With `dup_a`, `A = [A0, A0]` with `A0` of size `m x p/2`; with `dup_b`,
/// `B = [B0; B0]` with `B0` of size `q/2 x n`. Otherwise the factors are dense
/// standard normal and generically of full rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomSpec {
    pub m: usize,
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub dup_a: bool,
    pub dup_b: bool,
    pub seed: u64,
}

impl RandomSpec {
    pub fn new(m: usize, p: usize, q: usize, n: usize, seed: u64) -> Self {
        Self {
            m,
            p,
            q,
            n,
            dup_a: false,
            dup_b: false,
            seed,
        }
    }

    pub fn with_dup(mut self, dup_a: bool, dup_b: bool) -> Self {
        self.dup_a = dup_a;
        self.dup_b = dup_b;
        self
    }
}

/// Dense `rows x cols` standard-normal matrix.
pub fn randn<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DenseMat {
    DenseMat::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// `A`, `B` and `X` standard normal (with the requested duplication),
/// `C = A X B`, and the minimum-norm solution attached as reference.
pub fn random_problem(spec: &RandomSpec) -> Result<Problem> {
    let RandomSpec { m, p, q, n, .. } = *spec;
    if [m, p, q, n].contains(&0) {
        return Err(Error::Invalid("random problem dimensions must be positive".into()));
    }
    if (spec.dup_a && p % 2 != 0) || (spec.dup_b && q % 2 != 0) {
        return Err(Error::Invalid("duplicated blocks need an even dimension".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let a = if spec.dup_a {
        let a0 = randn(&mut rng, m, p / 2);
        a0.hcat(&a0)
    } else {
        randn(&mut rng, m, p)
    };
    let b = if spec.dup_b {
        let b0 = randn(&mut rng, q / 2, n);
        b0.vcat(&b0)
    } else {
        randn(&mut rng, q, n)
    };
    let x = randn(&mut rng, p, q);
    let a = SparseRowMat::from_dense(&a);
    let c = a.mul_dense(&x).matmul(&b);
    Problem::new(a, b, c)?.with_min_norm_oracle()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SvdFactors;

    #[test]
    fn same_seed_same_problem() {
        let s = RandomSpec::new(6, 4, 3, 5, 9);
        let a = random_problem(&s).unwrap();
        let b = random_problem(&s).unwrap();
        assert_eq!(a.a(), b.a());
        assert_eq!(a.c(), b.c());
        assert_eq!(a.x_star(), b.x_star());
    }

    #[test]
    fn duplicated_blocks_keep_base_rank() {
        let p = random_problem(&RandomSpec::new(10, 8, 6, 7, 1).with_dup(true, true)).unwrap();
        assert_eq!(SvdFactors::compute(&p.a().to_dense()).unwrap().rank(), 4);
        assert_eq!(SvdFactors::compute(p.b()).unwrap().rank(), 3);
    }

    #[test]
    fn set4_shape() {
        let p = random_problem(&RandomSpec::new(35, 60, 80, 20, 4)).unwrap();
        assert_eq!(p.dims(), (35, 60, 80, 20));
    }
}
