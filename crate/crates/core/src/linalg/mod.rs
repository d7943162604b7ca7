//! Dense and CSR storage, norms, factorizations and the oracle solvers the
//! iteration schemes are checked against.

mod dense;
mod qr;
mod sparse;
mod svd;

pub use dense::DenseMat;
pub use qr::QrFactors;
pub use sparse::{SparseRow, SparseRowMat};
pub use svd::{SvdFactors, SVD_MAX_SHORT_DIM};

pub(crate) use dense::{axpy, dot, norm2_sq};

use crate::error::{Error, Result};

/// Short side at or below which spectral norms come from an exact SVD.
pub const EXACT_SVD_DIM: usize = 64;
/// Power iteration cap.
pub const POWER_MAX_ITERS: usize = 100_000;
/// Largest Kronecker product dimension built explicitly.
pub const KRON_MAX_DIM: usize = 4096;

/// Anything that can act as a matrix on vectors.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    fn apply_t(&self, y: &[f64]) -> Vec<f64>;
    fn to_dense(&self) -> DenseMat;
    fn frobenius_norm(&self) -> f64;
}

impl LinearOperator for DenseMat {
    fn nrows(&self) -> usize {
        self.rows()
    }
    fn ncols(&self) -> usize {
        self.cols()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        self.vec_mul_t(x, &mut out);
        out
    }
    fn apply_t(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols()];
        self.vec_mul(y, &mut out);
        out
    }
    fn to_dense(&self) -> DenseMat {
        self.clone()
    }
    fn frobenius_norm(&self) -> f64 {
        DenseMat::frobenius_norm(self)
    }
}

impl LinearOperator for SparseRowMat {
    fn nrows(&self) -> usize {
        self.rows()
    }
    fn ncols(&self) -> usize {
        self.cols()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.mul_vec(x)
    }
    fn apply_t(&self, y: &[f64]) -> Vec<f64> {
        self.t_mul_vec(y)
    }
    fn to_dense(&self) -> DenseMat {
        SparseRowMat::to_dense(self)
    }
    fn frobenius_norm(&self) -> f64 {
        SparseRowMat::frobenius_norm(self)
    }
}

pub fn frobenius_norm<M: LinearOperator + ?Sized>(m: &M) -> f64 {
    m.frobenius_norm()
}

pub fn row_norms_squared(a: &SparseRowMat) -> Vec<f64> {
    a.row_norms_squared()
}

pub fn density(a: &SparseRowMat) -> f64 {
    a.density()
}

/// Largest singular value.
///
/// Exact SVD when the short side is at most [`EXACT_SVD_DIM`], otherwise power
/// iteration on `M^T M` from the normalized all-ones vector.
pub fn spectral_norm<M: LinearOperator + ?Sized>(m: &M) -> Result<f64> {
    if m.frobenius_norm() == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    if m.nrows().min(m.ncols()) <= EXACT_SVD_DIM {
        return Ok(SvdFactors::compute(&m.to_dense())?.sigma_max());
    }
    power_iteration(m)
}

fn power_iteration<M: LinearOperator + ?Sized>(m: &M) -> Result<f64> {
    let n = m.ncols();
    let starts: [Box<dyn Fn(usize) -> f64>; 2] = [
        Box::new(|_| 1.0),
        Box::new(|i| if i % 2 == 0 { 1.0 } else { -0.5 } * (1.0 + i as f64 / n as f64)),
    ];
    for start in &starts {
        let mut x: Vec<f64> = (0..n).map(start).collect();
        let nx = norm2_sq(&x).sqrt();
        x.iter_mut().for_each(|v| *v /= nx);
        let mut lambda_prev = 0.0;
        let mut degenerate = false;
        for _ in 0..POWER_MAX_ITERS {
            let y = m.apply(&x);
            let lambda = norm2_sq(&y);
            let z = m.apply_t(&y);
            let nz = norm2_sq(&z).sqrt();
            if nz == 0.0 {
                degenerate = true;
                break;
            }
            if (lambda - lambda_prev).abs() <= 1e-15 * lambda {
                return Ok(lambda.sqrt());
            }
            lambda_prev = lambda;
            x = z.into_iter().map(|v| v / nz).collect();
        }
        if !degenerate {
            return Err(Error::NoConvergence(POWER_MAX_ITERS));
        }
    }
    Err(Error::NoConvergence(POWER_MAX_ITERS))
}

/// Smallest singular value above `tau = sigma_max * max(rows, cols) * eps`.
pub fn sigma_min_positive<M: LinearOperator + ?Sized>(m: &M) -> Result<f64> {
    SvdFactors::compute(&m.to_dense())?
        .sigma_min_positive()
        .ok_or(Error::ZeroMatrix)
}

/// Thin QR of a full-column-rank matrix.
pub fn qr_thin(b: &DenseMat) -> Result<QrFactors> {
    QrFactors::compute(b)
}

/// Minimum-norm solution `A^+ C B^+`, checked for consistency.
pub fn min_norm_solution<M: LinearOperator + ?Sized>(a: &M, b: &DenseMat, c: &DenseMat) -> Result<DenseMat> {
    check_conformal(a.nrows(), a.ncols(), b, c)?;
    let a_pinv = SvdFactors::compute(&a.to_dense())?.pinv();
    let b_pinv = SvdFactors::compute(b)?.pinv();
    let x = a_pinv.matmul(c).matmul(&b_pinv);
    let c_norm = c.frobenius_norm();
    let res = a.to_dense().matmul(&x).matmul(b).distance(c);
    if res > 1e-8 * c_norm {
        return Err(Error::Inconsistent(if c_norm > 0.0 { res / c_norm } else { res }));
    }
    Ok(x)
}

pub(crate) fn check_conformal(m: usize, p: usize, b: &DenseMat, c: &DenseMat) -> Result<()> {
    if c.rows() != m || c.cols() != b.cols() {
        return Err(Error::DimensionMismatch(format!(
            "A is {m}x{p}, B is {}x{}, C is {}x{}",
            b.rows(),
            b.cols(),
            c.rows(),
            c.cols()
        )));
    }
    Ok(())
}

/// Orthogonal projector `A^+ A` onto the row space of `A`.
pub fn row_space_projector<M: LinearOperator + ?Sized>(a: &M) -> Result<DenseMat> {
    let basis = SvdFactors::compute(&a.to_dense())?.row_space_basis();
    Ok(basis.matmul_t(&basis))
}

/// Orthogonal projector `B B^+` onto the column space of `B`.
pub fn column_space_projector(b: &DenseMat) -> Result<DenseMat> {
    let basis = SvdFactors::compute(b)?.range_basis();
    Ok(basis.matmul_t(&basis))
}

/// Kronecker product `P (x) Q`.
pub fn kron_small(p: &DenseMat, q: &DenseMat) -> Result<DenseMat> {
    let rows = p.rows() * q.rows();
    let cols = p.cols() * q.cols();
    if rows > KRON_MAX_DIM || cols > KRON_MAX_DIM {
        return Err(Error::TooLarge(format!("Kronecker product of size {rows}x{cols}")));
    }
    Ok(DenseMat::from_fn(rows, cols, |i, j| {
        p[(i / q.rows(), j / q.cols())] * q[(i % q.rows(), j % q.cols())]
    }))
}

/// Column-stacking vectorization.
pub fn vec(m: &DenseMat) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.rows() * m.cols());
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Inverse of [`vec`].
pub fn unvec(v: &[f64], rows: usize, cols: usize) -> Result<DenseMat> {
    if v.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} cannot be reshaped to {rows}x{cols}",
            v.len()
        )));
    }
    Ok(DenseMat::from_fn(rows, cols, |i, j| v[j * rows + i]))
}

/// Solves `S Y = RHS` for symmetric positive definite `S` by Cholesky.
pub fn cholesky_solve(s: &DenseMat, rhs: &DenseMat) -> Result<DenseMat> {
    let n = s.rows();
    if s.cols() != n || rhs.rows() != n {
        return Err(Error::DimensionMismatch("cholesky_solve operands".into()));
    }
    let tol = s.max_abs() * n as f64 * f64::EPSILON;
    let mut l = DenseMat::zeros(n, n);
    for j in 0..n {
        let d = s[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        if d <= tol {
            return Err(Error::RankDeficient { pivot: d, tol });
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let v = s[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
            l[(i, j)] = v / ljj;
        }
    }
    let mut y = rhs.clone();
    for c in 0..rhs.cols() {
        for i in 0..n {
            let mut v = y[(i, c)];
            for k in 0..i {
                v -= l[(i, k)] * y[(k, c)];
            }
            y[(i, c)] = v / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut v = y[(i, c)];
            for k in (i + 1)..n {
                v -= l[(k, i)] * y[(k, c)];
            }
            y[(i, c)] = v / l[(i, i)];
        }
    }
    Ok(y)
}
