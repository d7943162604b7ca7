use crate::error::{Error, Result};
use crate::linalg::dense::{dot, DenseMat};

/// Short-side cap for dense SVDs.
pub const SVD_MAX_SHORT_DIM: usize = 4096;

const MAX_SWEEPS: usize = 80;

/// Thin SVD `M = U diag(s) V^T` with singular values sorted nonincreasing.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    /// `rows x k` left singular vectors, `k = min(rows, cols)`.
    pub u: DenseMat,
    pub s: Vec<f64>,
    /// `cols x k` right singular vectors.
    pub v: DenseMat,
    /// Numerical rank tolerance `sigma_max * max(rows, cols) * eps`.
    pub tol: f64,
}

impl SvdFactors {
    /// One-sided (Hestenes) Jacobi SVD.
    pub fn compute(m: &DenseMat) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows.min(cols) > SVD_MAX_SHORT_DIM {
            return Err(Error::TooLarge(format!(
                "SVD of {rows}x{cols} exceeds short-side cap {SVD_MAX_SHORT_DIM}"
            )));
        }
        if rows >= cols {
            let (u, s, v) = jacobi_tall(m)?;
            Ok(Self::finish(u, s, v, rows, cols))
        } else {
            let (v, s, u) = jacobi_tall(&m.transpose())?;
            Ok(Self::finish(u, s, v, rows, cols))
        }
    }

    fn finish(u: DenseMat, s: Vec<f64>, v: DenseMat, rows: usize, cols: usize) -> Self {
        let smax = s.first().copied().unwrap_or(0.0);
        let tol = smax * rows.max(cols) as f64 * f64::EPSILON;
        Self { u, s, v, tol }
    }

    pub fn sigma_max(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    pub fn rank(&self) -> usize {
        self.s.iter().filter(|&&s| s > self.tol).count()
    }

    /// Smallest singular value above the rank tolerance.
    pub fn sigma_min_positive(&self) -> Option<f64> {
        self.s.iter().copied().filter(|&s| s > self.tol).last()
    }

    /// Orthonormal basis of the column space (first `rank` left vectors).
    pub fn range_basis(&self) -> DenseMat {
        self.u.columns(0, self.rank())
    }

    /// Orthonormal basis of the row space (first `rank` right vectors).
    pub fn row_space_basis(&self) -> DenseMat {
        self.v.columns(0, self.rank())
    }

    /// Moore-Penrose pseudoinverse with rank truncation at `tol`.
    pub fn pinv(&self) -> DenseMat {
        let r = self.rank();
        let (rows, cols) = (self.u.rows(), self.v.rows());
        let mut out = DenseMat::zeros(cols, rows);
        for k in 0..r {
            let inv = 1.0 / self.s[k];
            for i in 0..cols {
                let vik = self.v[(i, k)] * inv;
                if vik == 0.0 {
                    continue;
                }
                for j in 0..rows {
                    out[(i, j)] += vik * self.u[(j, k)];
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> DenseMat {
        let k = self.s.len();
        let us = DenseMat::from_fn(self.u.rows(), k, |i, j| self.u[(i, j)] * self.s[j]);
        us.matmul_t(&self.v)
    }
}

/// Jacobi on a matrix with `rows >= cols`. Returns `(U, s, V)` sorted.
fn jacobi_tall(m: &DenseMat) -> Result<(DenseMat, Vec<f64>, DenseMat)> {
    let (rows, cols) = m.shape();
    // Column-major working copies.
    let mut a: Vec<Vec<f64>> = (0..cols).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let mut e = vec![0.0; cols];
            e[j] = 1.0;
            e
        })
        .collect();
    let mut norms: Vec<f64> = a.iter().map(|c| dot(c, c)).collect();

    let mut converged = cols < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        // Columns below eps * sigma_max are rounding noise of a deficient rank.
        let negligible = norms.iter().copied().fold(0.0, f64::max) * f64::EPSILON * f64::EPSILON;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let gamma = dot(&a[p], &a[q]);
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = a.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
                let (lo, hi) = v.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
                norms[p] = dot(&a[p], &a[p]);
                norms[q] = dot(&a[q], &a[q]);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }

    let mut sigma: Vec<f64> = norms.iter().map(|n| n.sqrt()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));

    let mut u_out = DenseMat::zeros(rows, cols);
    let mut v_out = DenseMat::zeros(cols, cols);
    for (k, &j) in order.iter().enumerate() {
        let sj = sigma[j];
        if sj > 0.0 {
            for i in 0..rows {
                u_out[(i, k)] = a[j][i] / sj;
            }
        }
        for i in 0..cols {
            v_out[(i, k)] = v[j][i];
        }
    }
    sigma = order.iter().map(|&j| sigma[j]).collect();
    Ok((u_out, sigma, v_out))
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let (a, b) = (*xi, *yi);
        *xi = c * a - s * b;
        *yi = s * a + c * b;
    }
}
