use nalgebra::{DMatrix, Hessenberg};

use crate::analysis::sweep::build_sweep_operator;
use crate::error::{Error, Result};
use crate::linalg::{self, DenseMat, SparseRowMat, SvdFactors};
use crate::solvers::Problem;

/// Largest column count for the dense `I_p - A^T L^{-1} A`.
pub const FULLROW_MAX_COLS: usize = 2000;

/// Iteration cap per eigenvalue in the shifted QR sweep.
const QR_MAX_ITS: usize = 60;

/// Eigenvalues `(re, im)` of a square dense matrix: Householder reduction to
/// Hessenberg form followed by the Francis double-shift QR iteration with
/// exceptional shifts every ten stalled iterations.
pub fn eigenvalues(m: &DenseMat) -> Result<Vec<(f64, f64)>> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::DimensionMismatch("eigenvalues need a square matrix".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let h = Hessenberg::new(DMatrix::from_row_slice(n, n, m.as_slice())).h();
    // 1-based working copy keeps the index arithmetic of the sweep readable.
    let mut a = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            a[i + 1][j + 1] = if i > j + 1 { 0.0 } else { h[(i, j)] };
        }
    }
    hqr(&mut a, n)
}

#[allow(clippy::many_single_char_names)]
fn hqr(a: &mut [Vec<f64>], n: usize) -> Result<Vec<(f64, f64)>> {
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n;
    let mut t = 0.0;
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nn][nn];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
            } else {
                let mut y = a[nn - 1][nn - 1];
                let mut w = a[nn][nn - 1] * a[nn - 1][nn];
                if l == nn - 1 {
                    let p = 0.5 * (y - x);
                    let q = p * p + w;
                    let mut z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + z.copysign(p);
                        wr[nn - 1] = x + z;
                        wr[nn] = if z != 0.0 { x - w / z } else { x + z };
                        wi[nn - 1] = 0.0;
                        wi[nn] = 0.0;
                    } else {
                        wr[nn - 1] = x + p;
                        wr[nn] = x + p;
                        wi[nn - 1] = -z;
                        wi[nn] = z;
                    }
                    nn -= 2;
                } else {
                    if its == QR_MAX_ITS {
                        return Err(Error::NoConvergence(QR_MAX_ITS));
                    }
                    if its > 0 && its % 10 == 0 {
                        t += x;
                        for (i, row) in a.iter_mut().enumerate().take(nn + 1).skip(1) {
                            row[i] -= x;
                        }
                        let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    let (mut p, mut q, mut r, mut z);
                    let mut m = nn - 2;
                    loop {
                        z = a[m][m];
                        r = x - z;
                        let s = y - z;
                        p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - r - s;
                        r = a[m + 2][m + 1];
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in (m + 2)..=nn {
                        a[i][i - 2] = 0.0;
                        if i != m + 2 {
                            a[i][i - 3] = 0.0;
                        }
                    }
                    let mut k = m;
                    while k < nn {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = if k != nn - 1 { a[k + 2][k - 1] } else { 0.0 };
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = (p * p + q * q + r * r).sqrt().copysign(p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    a[k][k - 1] = -a[k][k - 1];
                                }
                            } else {
                                a[k][k - 1] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nn {
                                let mut pp = a[k][j] + q * a[k + 1][j];
                                if k != nn - 1 {
                                    pp += r * a[k + 2][j];
                                    a[k + 2][j] -= pp * z;
                                }
                                a[k + 1][j] -= pp * y;
                                a[k][j] -= pp * x;
                            }
                            let mmin = nn.min(k + 3);
                            for row in a.iter_mut().take(mmin + 1).skip(l) {
                                let mut pp = x * row[k] + y * row[k + 1];
                                if k != nn - 1 {
                                    pp += z * row[k + 2];
                                    row[k + 2] -= pp * r;
                                }
                                row[k + 1] -= pp * q;
                                row[k] -= pp;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 2 || l + 1 >= nn {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| (wr[i], wi[i])).collect())
}

/// Largest eigenvalue modulus of a square dense matrix.
pub fn spectral_radius(m: &DenseMat) -> Result<f64> {
    Ok(eigenvalues(m)?.into_iter().map(|(re, im)| re.hypot(im)).fold(0.0, f64::max))
}

/// `A^T L_alpha^{-1} A` as a dense `p x p` matrix.
fn sweep_kernel(a: &SparseRowMat, alpha: f64) -> Result<DenseMat> {
    let p = a.cols();
    if p > FULLROW_MAX_COLS {
        return Err(Error::TooLarge(format!("{p} columns (limit {FULLROW_MAX_COLS})")));
    }
    let sweep = build_sweep_operator(a, alpha)?;
    let y = sweep.solve(&a.to_dense())?;
    Ok(a.t_mul_dense(&y))
}

fn identity_minus(k: &DenseMat) -> DenseMat {
    DenseMat::identity(k.rows()).sub(k)
}

/// `rho(I_p - A^T L_alpha^{-1} A)`: the error propagation of one cyclic sweep
/// on `A X = C`. Equals one whenever `A` has a nontrivial null space, since
/// that component is never touched.
pub fn spectral_radius_fullrow(a: &SparseRowMat, alpha: f64) -> Result<f64> {
    spectral_radius(&identity_minus(&sweep_kernel(a, alpha)?))
}

/// Same operator restricted to the row space of `A`, where the error of an
/// iteration started from zero lives.
pub fn restricted_spectral_radius_fullrow(a: &SparseRowMat, alpha: f64) -> Result<f64> {
    let m = identity_minus(&sweep_kernel(a, alpha)?);
    let v = SvdFactors::compute(&a.to_dense())?.row_space_basis();
    spectral_radius(&v.transpose().matmul(&m).matmul(&v))
}

fn fullcol_operator(a: &SparseRowMat, q: &DenseMat, alpha: f64) -> Result<DenseMat> {
    let (p, qd) = (a.cols(), q.rows());
    if p * qd > linalg::KRON_MAX_DIM {
        return Err(Error::TooLarge(format!("pq = {} (limit {})", p * qd, linalg::KRON_MAX_DIM)));
    }
    let k = sweep_kernel(a, alpha)?;
    let qqt = q.matmul_t(q);
    Ok(identity_minus(&linalg::kron_small(&qqt, &k)?))
}

/// `rho(I_pq - Q Q^T (x) A^T L_alpha^{-1} A)` on the whole space.
pub fn spectral_radius_fullcol(a: &SparseRowMat, q: &DenseMat, alpha: f64) -> Result<f64> {
    spectral_radius(&fullcol_operator(a, q, alpha)?)
}

/// Spectral radius of `I_pq - Q Q^T (x) A^T L_alpha^{-1} A` restricted to
/// `range(Q) (x) range(A^T)`, using orthonormal bases of both factors.
pub fn restricted_spectral_radius_fullcol(a: &SparseRowMat, q: &DenseMat, alpha: f64) -> Result<f64> {
    let m = fullcol_operator(a, q, alpha)?;
    let ub = SvdFactors::compute(q)?.range_basis();
    let va = SvdFactors::compute(&a.to_dense())?.row_space_basis();
    let w = linalg::kron_small(&ub, &va)?;
    spectral_radius(&w.transpose().matmul(&m).matmul(&w))
}

/// Limit of the cyclic method started from `x0`:
/// `X* + X0 - A^+ A X0 B B^+`, with `X*` the attached reference or the
/// minimum-norm solution.
pub fn x_star_0(problem: &Problem, x0: &DenseMat) -> Result<DenseMat> {
    let (_, p, q, _) = problem.dims();
    if x0.shape() != (p, q) {
        return Err(Error::DimensionMismatch("initial guess has the wrong shape".into()));
    }
    let x_star = match problem.x_star() {
        Some(x) => x.clone(),
        None => linalg::min_norm_solution(problem.a(), problem.b(), problem.c())?,
    };
    let pa = linalg::row_space_projector(problem.a())?;
    let pb = linalg::column_space_projector(problem.b())?;
    Ok(x_star.add(x0).sub(&pa.matmul(x0).matmul(&pb)))
}
