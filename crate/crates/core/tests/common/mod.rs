//! Independent oracles and generators shared by the integration tests.
//!
//! Every reference quantity here goes through nalgebra, never through the
//! crate's own factorizations.

#![allow(dead_code)]

use axb_kaczmarz::{DenseMat, Problem, SparseRowMat};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn to_na(m: &DenseMat) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn from_na(m: &DMatrix<f64>) -> DenseMat {
    DenseMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn sparse_to_na(a: &SparseRowMat) -> DMatrix<f64> {
    to_na(&a.to_dense())
}

/// Pseudoinverse through the symmetric eigendecomposition of the small Gram
/// matrix: `M^+ = (M^T M)^+ M^T` for tall `M`. Eigenvalues below
/// `1e-10 * lambda_max` are treated as zero. nalgebra's SVD returns
/// inaccurate singular vectors for matrices with exactly duplicated blocks,
/// so it is only used for singular values here.
pub fn pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.nrows() < m.ncols() {
        return pinv(&m.transpose()).transpose();
    }
    let eig = (m.transpose() * m).symmetric_eigen();
    let lmax = eig.eigenvalues.max();
    let n = m.ncols();
    let mut inv = DMatrix::zeros(n, n);
    for k in 0..n {
        let l = eig.eigenvalues[k];
        if l > 1e-10 * lmax {
            let v = eig.eigenvectors.column(k);
            inv += (v * v.transpose()) / l;
        }
    }
    inv * m.transpose()
}

pub fn rank(m: &DMatrix<f64>) -> usize {
    let s = m.clone().svd(false, false).singular_values;
    let tol = s.max() * m.nrows().max(m.ncols()) as f64 * f64::EPSILON;
    s.iter().filter(|&&v| v > tol).count()
}

/// Smallest singular value above the rank cutoff.
pub fn sigma_min_positive(m: &DMatrix<f64>) -> f64 {
    let s = m.clone().svd(false, false).singular_values;
    let tol = s.max() * m.nrows().max(m.ncols()) as f64 * f64::EPSILON;
    s.iter().copied().filter(|&v| v > tol).fold(f64::INFINITY, f64::min)
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

/// `A^+ C B^+`.
pub fn min_norm(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> DMatrix<f64> {
    pinv(a) * c * pinv(b)
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DenseMat {
    DenseMat::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Rank structure of a coefficient matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rank {
    FullColumn,
    FullRow,
    Deficient,
}

pub const RANKS: [Rank; 3] = [Rank::FullColumn, Rank::FullRow, Rank::Deficient];

/// All nine `(rank of A, rank of B)` pairs.
pub fn configurations() -> Vec<(Rank, Rank)> {
    RANKS.iter().flat_map(|&a| RANKS.iter().map(move |&b| (a, b))).collect()
}

/// Random matrix of the given rank structure with both sides at most 30.
/// Deficient matrices duplicate a random block, `[M0, M0]` for the left
/// factor and `[M0; M0]` for the right one.
pub fn random_factor<R: Rng + ?Sized>(rng: &mut R, rank: Rank, left: bool) -> DenseMat {
    match rank {
        Rank::FullColumn => {
            let r = rng.random_range(16..=30);
            let c = rng.random_range(3..=8);
            gaussian(rng, r, c)
        }
        Rank::FullRow => {
            let r = rng.random_range(3..=8);
            let c = rng.random_range(16..=30);
            gaussian(rng, r, c)
        }
        Rank::Deficient => {
            let long = rng.random_range(8..=20);
            let k = rng.random_range(2..=6);
            if left {
                let m0 = gaussian(rng, long, k);
                m0.hcat(&m0)
            } else {
                let m0 = gaussian(rng, k, long);
                m0.vcat(&m0)
            }
        }
    }
}

/// `C = A X B` for a Gaussian `X`, with the nalgebra minimum-norm solution
/// attached as reference.
pub fn oracle_problem<R: Rng + ?Sized>(rng: &mut R, a: DenseMat, b: DenseMat) -> Problem {
    let x = gaussian(rng, a.cols(), b.rows());
    let (an, bn) = (to_na(&a), to_na(&b));
    let c = &an * to_na(&x) * &bn;
    let xs = min_norm(&an, &bn, &c);
    Problem::new(SparseRowMat::from_dense(&a), b, from_na(&c))
        .and_then(|p| p.with_x_star(from_na(&xs)))
        .expect("consistent random problem")
}

/// `||X - Y||_F / max(1, ||Y||_F)`.
pub fn rel_dist(x: &DenseMat, y: &DenseMat) -> f64 {
    x.distance(y) / y.frobenius_norm().max(1.0)
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}
