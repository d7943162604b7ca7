use crate::error::{Error, Result};
use crate::linalg::dense::DenseMat;

/// Thin QR factors `B = Q R` with `Q` having orthonormal columns and `R`
/// upper triangular with a positive diagonal.
#[derive(Clone, Debug)]
pub struct QrFactors {
    pub q: DenseMat,
    pub r: DenseMat,
}

impl QrFactors {
    /// Householder thin QR of a full-column-rank matrix.
    pub fn compute(b: &DenseMat) -> Result<Self> {
        let (rows, cols) = b.shape();
        if cols > rows {
            return Err(Error::DimensionMismatch(format!(
                "thin QR needs rows >= cols, got {rows}x{cols}"
            )));
        }
        let scale = b.frobenius_norm();
        if scale == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        let tol = scale * rows.max(cols) as f64 * f64::EPSILON;

        let mut r = b.clone();
        let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(cols);
        for k in 0..cols {
            let mut v: Vec<f64> = (k..rows).map(|i| r[(i, k)]).collect();
            let norm_x = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm_x <= tol {
                return Err(Error::RankDeficient { pivot: norm_x, tol });
            }
            let alpha = if v[0] >= 0.0 { -norm_x } else { norm_x };
            v[0] -= alpha;
            let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
            if vnorm_sq > 0.0 {
                for j in k..cols {
                    let s: f64 = (k..rows).map(|i| v[i - k] * r[(i, j)]).sum::<f64>() * 2.0 / vnorm_sq;
                    for i in k..rows {
                        r[(i, j)] -= s * v[i - k];
                    }
                }
            }
            reflectors.push(v);
        }

        // Accumulate Q = H_0 ... H_{n-1} [I; 0].
        let mut q = DenseMat::from_fn(rows, cols, |i, j| if i == j { 1.0 } else { 0.0 });
        for k in (0..cols).rev() {
            let v = &reflectors[k];
            let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
            if vnorm_sq == 0.0 {
                continue;
            }
            for j in 0..cols {
                let s: f64 = (k..rows).map(|i| v[i - k] * q[(i, j)]).sum::<f64>() * 2.0 / vnorm_sq;
                for i in k..rows {
                    q[(i, j)] -= s * v[i - k];
                }
            }
        }

        let mut r_thin = DenseMat::from_fn(cols, cols, |i, j| if j >= i { r[(i, j)] } else { 0.0 });
        for k in 0..cols {
            if r_thin[(k, k)] < 0.0 {
                for j in k..cols {
                    r_thin[(k, j)] = -r_thin[(k, j)];
                }
                for i in 0..rows {
                    q[(i, k)] = -q[(i, k)];
                }
            }
            if r_thin[(k, k)] <= tol {
                return Err(Error::RankDeficient {
                    pivot: r_thin[(k, k)],
                    tol,
                });
            }
        }
        Ok(Self { q, r: r_thin })
    }

    /// Solves `Y R = C` for `Y` by forward substitution along each row of `C`,
    /// i.e. returns `C R^{-1}` without forming the inverse.
    pub fn right_solve(&self, c: &DenseMat) -> Result<DenseMat> {
        let n = self.r.rows();
        if c.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "C has {} columns, R is {n}x{n}",
                c.cols()
            )));
        }
        let mut y = DenseMat::zeros(c.rows(), n);
        for i in 0..c.rows() {
            let crow = c.row(i);
            let yrow = y.row_mut(i);
            for j in 0..n {
                let mut s = crow[j];
                for k in 0..j {
                    s -= yrow[k] * self.r[(k, j)];
                }
                yrow[j] = s / self.r[(j, j)];
            }
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_column() {
        let f = QrFactors::compute(&DenseMat::from_rows(&[&[3.0], &[4.0]])).unwrap();
        assert!((f.q[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((f.q[(1, 0)] - 0.8).abs() < 1e-15);
        assert!((f.r[(0, 0)] - 5.0).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_input_is_fixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let b = DenseMat::from_rows(&[&[s, 0.0], &[s, 0.0], &[0.0, 1.0]]);
        let f = QrFactors::compute(&b).unwrap();
        assert!(f.q.distance(&b) < 1e-15);
        assert!(f.r.distance(&DenseMat::identity(2)) < 1e-15);
    }

    #[test]
    fn rank_deficient_is_rejected() {
        let b = DenseMat::from_rows(&[&[1.0, 2.0], &[2.0, 4.0], &[3.0, 6.0]]);
        assert!(matches!(QrFactors::compute(&b), Err(Error::RankDeficient { .. })));
        assert!(QrFactors::compute(&DenseMat::from_rows(&[&[1.0, 2.0]])).is_err());
    }

    #[test]
    fn right_solve_inverts_r() {
        let b = DenseMat::from_rows(&[&[2.0, 1.0], &[0.0, 3.0], &[1.0, 1.0]]);
        let f = QrFactors::compute(&b).unwrap();
        let c = DenseMat::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let y = f.right_solve(&c).unwrap();
        assert!(y.matmul(&f.r).distance(&c) < 1e-13);
    }
}
