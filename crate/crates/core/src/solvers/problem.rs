use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMat, SparseRowMat};

/// A consistent instance of `A X B = C` with an optional reference solution.
#[derive(Debug)]
pub struct Problem {
    a: SparseRowMat,
    b: DenseMat,
    c: DenseMat,
    x_star: Option<DenseMat>,
    row_norms: Vec<f64>,
    a_fro_sq: f64,
    b_identity: bool,
    a_norm: OnceLock<f64>,
    b_norm: OnceLock<f64>,
}

impl Clone for Problem {
    fn clone(&self) -> Self {
        let out = Self {
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
            x_star: self.x_star.clone(),
            row_norms: self.row_norms.clone(),
            a_fro_sq: self.a_fro_sq,
            b_identity: self.b_identity,
            a_norm: OnceLock::new(),
            b_norm: OnceLock::new(),
        };
        if let Some(v) = self.a_norm.get() {
            let _ = out.a_norm.set(*v);
        }
        if let Some(v) = self.b_norm.get() {
            let _ = out.b_norm.set(*v);
        }
        out
    }
}

impl Problem {
    /// Validates conformal dimensions and that `A` has no zero rows.
    pub fn new(a: SparseRowMat, b: DenseMat, c: DenseMat) -> Result<Self> {
        linalg::check_conformal(a.rows(), a.cols(), &b, &c)?;
        if let Some(i) = a.first_zero_row() {
            return Err(Error::ZeroRow(i));
        }
        if a.rows() == 0 || b.rows() == 0 {
            return Err(Error::Invalid("empty coefficient matrix".into()));
        }
        let row_norms = a.row_norms_squared();
        let a_fro_sq = row_norms.iter().sum();
        let b_identity = b.is_identity();
        Ok(Self {
            a,
            b,
            c,
            x_star: None,
            row_norms,
            a_fro_sq,
            b_identity,
            a_norm: OnceLock::new(),
            b_norm: OnceLock::new(),
        })
    }

    /// Attaches a reference solution; it must satisfy the equation to
    /// `1e-8 * ||C||_F`.
    pub fn with_x_star(mut self, x_star: DenseMat) -> Result<Self> {
        let (_, p, q, _) = self.dims();
        if x_star.shape() != (p, q) {
            return Err(Error::DimensionMismatch(format!(
                "reference solution is {}x{}, expected {p}x{q}",
                x_star.rows(),
                x_star.cols()
            )));
        }
        let res = self.residual(&x_star).frobenius_norm();
        let c_norm = self.c.frobenius_norm();
        if res > 1e-8 * c_norm {
            return Err(Error::Inconsistent(res / c_norm.max(f64::MIN_POSITIVE)));
        }
        self.x_star = Some(x_star);
        Ok(self)
    }

    /// Attaches the minimum-norm solution `A^+ C B^+` as the reference.
    pub fn with_min_norm_oracle(self) -> Result<Self> {
        let x = linalg::min_norm_solution(&self.a, &self.b, &self.c)?;
        self.with_x_star(x)
    }

    pub fn a(&self) -> &SparseRowMat {
        &self.a
    }

    pub fn b(&self) -> &DenseMat {
        &self.b
    }

    pub fn c(&self) -> &DenseMat {
        &self.c
    }

    pub fn x_star(&self) -> Option<&DenseMat> {
        self.x_star.as_ref()
    }

    /// `(m, p, q, n)` with `A: m x p`, `B: q x n`.
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.a.rows(), self.a.cols(), self.b.rows(), self.b.cols())
    }

    /// `||A_{i,:}||^2` per row.
    pub fn row_norms_squared(&self) -> &[f64] {
        &self.row_norms
    }

    pub fn a_fro_sq(&self) -> f64 {
        self.a_fro_sq
    }

    pub(crate) fn b_is_identity(&self) -> bool {
        self.b_identity
    }

    /// `||A||_2`, computed once.
    pub fn a_spectral_norm(&self) -> Result<f64> {
        if let Some(v) = self.a_norm.get() {
            return Ok(*v);
        }
        let v = linalg::spectral_norm(&self.a)?;
        Ok(*self.a_norm.get_or_init(|| v))
    }

    /// `||B||_2`, computed once.
    pub fn b_spectral_norm(&self) -> Result<f64> {
        if let Some(v) = self.b_norm.get() {
            return Ok(*v);
        }
        let v = if self.b_identity { 1.0 } else { linalg::spectral_norm(&self.b)? };
        Ok(*self.b_norm.get_or_init(|| v))
    }

    /// `A X B`, with the cheaper association order.
    pub fn apply(&self, x: &DenseMat) -> DenseMat {
        let (m, p, q, n) = self.dims();
        if self.b_identity {
            return self.a.mul_dense(x);
        }
        let nnz = self.a.nnz();
        let left_first = nnz * q + m * q * n;
        let right_first = p * q * n + nnz * n;
        if left_first <= right_first {
            self.a.mul_dense(x).matmul(&self.b)
        } else {
            self.a.mul_dense(&x.matmul(&self.b))
        }
    }

    /// `A^T R B^T`, with the cheaper association order.
    pub fn apply_adjoint(&self, r: &DenseMat) -> DenseMat {
        let (m, p, q, n) = self.dims();
        if self.b_identity {
            return self.a.t_mul_dense(r);
        }
        let nnz = self.a.nnz();
        let left_first = nnz * n + p * n * q;
        let right_first = m * n * q + nnz * q;
        if left_first <= right_first {
            self.a.t_mul_dense(r).matmul_t(&self.b)
        } else {
            self.a.t_mul_dense(&r.matmul_t(&self.b))
        }
    }

    /// `C - A X B`.
    pub fn residual(&self, x: &DenseMat) -> DenseMat {
        self.c.sub(&self.apply(x))
    }

    /// Relative solution error against the reference, if one is attached.
    pub fn rse(&self, x: &DenseMat) -> Option<f64> {
        self.x_star.as_ref().map(|xs| {
            let n = xs.frobenius_norm();
            let d = x.distance(xs);
            if n > 0.0 {
                d / n
            } else {
                d
            }
        })
    }

    /// Applies `A <- D A`, `C <- D C` for a positive diagonal `D`.
    pub fn scale_rows(&self, d: &[f64]) -> Result<Self> {
        if d.len() != self.a.rows() || d.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Invalid("row scaling must be positive and of length m".into()));
        }
        let c = DenseMat::from_fn(self.c.rows(), self.c.cols(), |i, j| d[i] * self.c[(i, j)]);
        let mut p = Problem::new(self.a.scale_rows(d), self.b.clone(), c)?;
        p.x_star = self.x_star.clone();
        Ok(p)
    }

    /// Row `k` of the result is row `perm[k]` of `(A, C)`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.a.rows()];
        if perm.len() != seen.len() || perm.iter().any(|&i| i >= seen.len() || std::mem::replace(&mut seen[i], true)) {
            return Err(Error::Invalid("not a permutation of the rows".into()));
        }
        let c = DenseMat::from_fn(self.c.rows(), self.c.cols(), |i, j| self.c[(perm[i], j)]);
        let mut p = Problem::new(self.a.permute_rows(perm), self.b.clone(), c)?;
        p.x_star = self.x_star.clone();
        Ok(p)
    }

    pub(crate) fn replace_bc(&self, b: DenseMat, c: DenseMat) -> Result<Self> {
        let mut p = Problem::new(self.a.clone(), b, c)?;
        p.x_star = self.x_star.clone();
        if let Some(v) = self.a_norm.get() {
            let _ = p.a_norm.set(*v);
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Problem {
        let a = SparseRowMat::from_dense(&DenseMat::from_rows(&[&[1.0, 2.0], &[0.0, 1.0], &[1.0, 0.0]]));
        let b = DenseMat::from_rows(&[&[1.0, 0.0, 1.0], &[0.0, 2.0, 1.0]]);
        let x = DenseMat::from_rows(&[&[1.0, -1.0], &[0.5, 2.0]]);
        let c = a.mul_dense(&x).matmul(&b);
        Problem::new(a, b, c).unwrap().with_x_star(x).unwrap()
    }

    #[test]
    fn rejects_zero_row_and_bad_dims() {
        let a = SparseRowMat::from_dense(&DenseMat::from_rows(&[&[1.0], &[0.0]]));
        assert!(matches!(
            Problem::new(a, DenseMat::identity(1), DenseMat::zeros(2, 1)),
            Err(Error::ZeroRow(1))
        ));
        let a = SparseRowMat::identity(2);
        assert!(Problem::new(a, DenseMat::identity(1), DenseMat::zeros(3, 1)).is_err());
    }

    #[test]
    fn rejects_wrong_reference() {
        let p = tiny();
        let wrong = p.x_star().unwrap().scale(2.0);
        assert!(matches!(p.clone().with_x_star(wrong), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn residual_and_adjoint_orders_agree() {
        let p = tiny();
        assert!(p.residual(p.x_star().unwrap()).frobenius_norm() < 1e-14);
        let r = DenseMat::from_fn(3, 3, |i, j| (i + 2 * j) as f64);
        let dense = p.a().to_dense().transpose().matmul(&r).matmul_t(p.b());
        assert!(p.apply_adjoint(&r).distance(&dense) < 1e-12);
    }

    #[test]
    fn min_norm_oracle_is_attached() {
        let p = tiny().with_min_norm_oracle().unwrap();
        assert!(p.rse(p.x_star().unwrap()).unwrap() == 0.0);
    }
}
