//! Single-step kernels shared by the drivers.

use crate::analysis::SweepOperator;
use crate::error::{Error, Result};
use crate::linalg::{self, axpy, dot, norm2_sq, DenseMat, QrFactors, SparseRowMat};
use crate::solvers::problem::Problem;

/// Current iterate together with the optionally maintained residual.
#[derive(Clone, Debug)]
pub struct IterateState {
    pub x: DenseMat,
    r: Option<DenseMat>,
    r_norms: Vec<f64>,
    /// Steps taken so far.
    pub k: usize,
    /// Row used by the last step.
    pub last_row: Option<usize>,
    buf_q: Vec<f64>,
    buf_n: Vec<f64>,
}

impl IterateState {
    /// Row residual `C_i - A_i X B` from before the last [`row_step`].
    pub(crate) fn last_row_residual(&self, problem: &Problem) -> &[f64] {
        if problem.b_is_identity() {
            &self.buf_q
        } else {
            &self.buf_n
        }
    }

    /// State without a maintained residual; `x0` defaults to zero.
    pub fn new(problem: &Problem, x0: Option<DenseMat>) -> Result<Self> {
        let (_, p, q, n) = problem.dims();
        let x = match x0 {
            Some(x) if x.shape() != (p, q) => {
                return Err(Error::DimensionMismatch(format!(
                    "initial guess is {}x{}, expected {p}x{q}",
                    x.rows(),
                    x.cols()
                )))
            }
            Some(x) => x,
            None => DenseMat::zeros(p, q),
        };
        Ok(Self {
            x,
            r: None,
            r_norms: Vec::new(),
            k: 0,
            last_row: None,
            buf_q: vec![0.0; q],
            buf_n: vec![0.0; n],
        })
    }

    /// State that also carries `R = C - A X B` and its squared row norms.
    pub fn with_residual(problem: &Problem, x0: Option<DenseMat>) -> Result<Self> {
        let mut s = Self::new(problem, x0)?;
        s.refresh_residual(problem);
        Ok(s)
    }

    pub fn residual(&self) -> Option<&DenseMat> {
        self.r.as_ref()
    }

    /// `||R_i||^2` of the maintained residual.
    pub fn residual_row_norms(&self) -> Result<&[f64]> {
        if self.r.is_none() {
            return Err(Error::Invalid("residual is not maintained for this state".into()));
        }
        Ok(&self.r_norms)
    }

    /// `||R||_F^2` of the maintained residual.
    pub fn residual_fro_sq(&self) -> Option<f64> {
        self.r.as_ref().map(|_| self.r_norms.iter().sum())
    }

    /// Recomputes the residual from scratch and returns the Frobenius distance
    /// between the old maintained value and the fresh one (zero if none was held).
    pub fn refresh_residual(&mut self, problem: &Problem) -> f64 {
        let fresh = problem.residual(&self.x);
        let drift = self.r.as_ref().map_or(0.0, |r| r.distance(&fresh));
        self.r_norms = (0..fresh.rows()).map(|i| norm2_sq(fresh.row(i))).collect();
        self.r = Some(fresh);
        drift
    }
}

fn check_row(problem: &Problem, i: usize) -> Result<f64> {
    let m = problem.dims().0;
    if i >= m {
        return Err(Error::Invalid(format!("row {i} out of range for {m} rows")));
    }
    let norm = problem.row_norms_squared()[i];
    if !(norm > 0.0) {
        return Err(Error::ZeroRow(i));
    }
    Ok(norm)
}

/// `X += coef * A_i^T w`.
fn rank_one_update(x: &mut DenseMat, a: &SparseRowMat, i: usize, coef: f64, w: &[f64]) {
    for (j, aij) in a.row(i).iter() {
        axpy(coef * aij, w, x.row_mut(j));
    }
}

/// `out = y B` for row vector `y`.
fn times_b(b: &DenseMat, y: &[f64], out: &mut [f64]) {
    b.vec_mul(y, out);
}

/// One row-action step on row `i`:
/// `X <- X + alpha / ||A_i||^2 * A_i^T ((C_i - A_i X B) B^T)`.
///
/// The residual row is computed from the iterate; a maintained residual, if
/// any, is dropped. Returns the Frobenius norm of the update.
pub fn row_step(state: &mut IterateState, problem: &Problem, i: usize, alpha: f64) -> Result<f64> {
    let a_norm_sq = check_row(problem, i)?;
    let a = problem.a();
    let b = problem.b();
    let c_row = problem.c().row(i);
    state.r = None;

    // y = A_i X
    let y = &mut state.buf_q;
    y.iter_mut().for_each(|v| *v = 0.0);
    for (j, aij) in a.row(i).iter() {
        axpy(aij, state.x.row(j), y);
    }

    let coef = alpha / a_norm_sq;
    if problem.b_is_identity() {
        // w = C_i - A_i X
        for (yv, cv) in y.iter_mut().zip(c_row) {
            *yv = cv - *yv;
        }
    } else {
        let z = &mut state.buf_n;
        times_b(b, y, z);
        for (zv, cv) in z.iter_mut().zip(c_row) {
            *zv = cv - *zv;
        }
        // w = r B^T
        for (l, yl) in y.iter_mut().enumerate() {
            *yl = dot(b.row(l), z);
        }
    }
    let w = &state.buf_q;
    rank_one_update(&mut state.x, a, i, coef, w);
    state.k += 1;
    state.last_row = Some(i);
    Ok(coef * a_norm_sq.sqrt() * norm2_sq(w).sqrt())
}

/// Row step driven by the maintained residual, followed by the recurrence
/// `R <- R - alpha / ||A_i||^2 (A A_i^T) ((R_i B^T) B)`.
///
/// `gram` must be `A A^T`. Only the rows of `R` touched by column `i` of the
/// Gram matrix change; their squared norms are recomputed from scratch.
pub fn residual_row_step(
    state: &mut IterateState,
    problem: &Problem,
    gram: &SparseRowMat,
    i: usize,
    alpha: f64,
) -> Result<f64> {
    let a_norm_sq = check_row(problem, i)?;
    let m = problem.dims().0;
    if gram.shape() != (m, m) {
        return Err(Error::DimensionMismatch("Gram matrix must be m x m".into()));
    }
    let Some(r) = state.r.as_mut() else {
        return Err(Error::Invalid("residual is not maintained for this state".into()));
    };
    let b = problem.b();
    let coef = alpha / a_norm_sq;

    let w = &mut state.buf_q;
    let v = &mut state.buf_n;
    if problem.b_is_identity() {
        w.copy_from_slice(r.row(i));
        v.copy_from_slice(r.row(i));
    } else {
        let ri = r.row(i);
        for (l, wl) in w.iter_mut().enumerate() {
            *wl = dot(b.row(l), ri);
        }
        times_b(b, w, v);
    }

    rank_one_update(&mut state.x, problem.a(), i, coef, w);
    for (j, gji) in gram.row(i).iter() {
        let rj = r.row_mut(j);
        axpy(-coef * gji, v, rj);
        state.r_norms[j] = norm2_sq(rj);
    }
    state.k += 1;
    state.last_row = Some(i);
    Ok(coef * a_norm_sq.sqrt() * norm2_sq(w).sqrt())
}

/// Largest admissible gradient step, `2 / (||A||^2 ||B||^2)`.
pub fn gi_step_upper(problem: &Problem) -> Result<f64> {
    let an = problem.a_spectral_norm()?;
    let bn = problem.b_spectral_norm()?;
    Ok(2.0 / (an * an * bn * bn))
}

/// Full-gradient step `X <- X + alpha A^T (C - A X B) B^T`. Returns the update
/// norm.
pub fn gi_step(state: &mut IterateState, problem: &Problem, alpha: f64) -> Result<f64> {
    let upper = gi_step_upper(problem)?;
    if !(alpha >= 0.0 && alpha < upper) {
        return Err(Error::StepSize { alpha, upper });
    }
    let r = problem.residual(&state.x);
    Ok(gi_update(state, problem, alpha, &r))
}

pub(crate) fn gi_update(state: &mut IterateState, problem: &Problem, alpha: f64, residual: &DenseMat) -> f64 {
    let g = problem.apply_adjoint(residual);
    for (xv, gv) in state.x.as_mut_slice().iter_mut().zip(g.as_slice()) {
        *xv += alpha * gv;
    }
    state.r = None;
    state.k += 1;
    state.last_row = None;
    alpha * g.frobenius_norm()
}

/// Rewrites `A X B = C` with `B = QR` of full column rank as `A X Q = C R^{-1}`.
pub fn transform_fullcol(problem: &Problem) -> Result<(Problem, QrFactors)> {
    let qr = linalg::qr_thin(problem.b())?;
    let c_hat = qr.right_solve(problem.c())?;
    let p = problem.replace_bc(qr.q.clone(), c_hat)?;
    Ok((p, qr))
}

/// Rewrites `A X B = C` with `B` of full row rank as
/// `A X = C B^T (B B^T)^{-1}`.
pub fn transform_fullrow(problem: &Problem) -> Result<Problem> {
    let b = problem.b();
    let (q, n) = b.shape();
    if q > n {
        return Err(Error::DimensionMismatch(format!("full row rank needs q <= n, got {q}x{n}")));
    }
    let bbt = b.matmul_t(b);
    let rhs = b.matmul_t(problem.c());
    let c_tilde = linalg::cholesky_solve(&bbt, &rhs)?.transpose();
    problem.replace_bc(DenseMat::identity(q), c_tilde)
}

/// One full cycle `X + A^T L^{-1} (C - A X Q) Q^T` of the cyclic method on a
/// transformed problem whose `B` has orthonormal columns (or is the identity).
pub fn sweep_formula_step(x: &DenseMat, problem: &Problem, sweep: &SweepOperator) -> Result<DenseMat> {
    let (m, p, q, n) = problem.dims();
    if sweep.dim() != m {
        return Err(Error::DimensionMismatch(format!(
            "sweep operator is {0}x{0}, A has {m} rows",
            sweep.dim()
        )));
    }
    if x.shape() != (p, q) {
        return Err(Error::DimensionMismatch("iterate has the wrong shape".into()));
    }
    if !problem.b_is_identity() {
        let b = problem.b();
        let gram = b.transpose().matmul(b);
        let dev = gram.distance(&DenseMat::identity(n));
        if dev > 1e-10 * n as f64 {
            return Err(Error::Invalid(format!(
                "B must have orthonormal columns (||B^T B - I||_F = {dev:e})"
            )));
        }
    }
    let z = problem.residual(x);
    let y = sweep.solve(&z)?;
    Ok(x.add(&problem.apply_adjoint(&y)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(a: f64, b: f64, c: f64) -> Problem {
        Problem::new(
            SparseRowMat::from_dense(&DenseMat::from_rows(&[&[a]])),
            DenseMat::from_rows(&[&[b]]),
            DenseMat::from_rows(&[&[c]]),
        )
        .unwrap()
    }

    #[test]
    fn scalar_row_steps() {
        let p = scalar(2.0, 1.0, 6.0);
        let mut s = IterateState::new(&p, None).unwrap();
        row_step(&mut s, &p, 0, 1.0).unwrap();
        assert!((s.x[(0, 0)] - 3.0).abs() < 1e-15);

        let p = scalar(1.0, 2.0, 4.0);
        let mut s = IterateState::new(&p, None).unwrap();
        row_step(&mut s, &p, 0, 0.25).unwrap();
        assert!((s.x[(0, 0)] - 2.0).abs() < 1e-15);
        let upd = row_step(&mut s, &p, 0, 0.25).unwrap();
        assert_eq!(upd, 0.0);
        assert_eq!(s.x[(0, 0)], 2.0);
    }

    #[test]
    fn recurrence_zeroes_selected_row_when_b_is_one() {
        let a = SparseRowMat::from_dense(&DenseMat::from_rows(&[&[1.0, 2.0], &[3.0, -1.0], &[0.5, 0.5]]));
        let c = DenseMat::from_rows(&[&[1.0], &[2.0], &[3.0]]);
        let p = Problem::new(a, DenseMat::identity(1), c).unwrap();
        let g = p.a().gram();
        let mut s = IterateState::with_residual(&p, None).unwrap();
        residual_row_step(&mut s, &p, &g, 1, 1.0).unwrap();
        assert!(s.residual().unwrap()[(1, 0)].abs() < 1e-15);
        let before = s.residual().unwrap().clone();
        residual_row_step(&mut s, &p, &g, 2, 0.0).unwrap();
        assert_eq!(s.residual().unwrap(), &before);
    }

    #[test]
    fn gi_identity_is_exact_in_one_step() {
        let c = DenseMat::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let p = Problem::new(SparseRowMat::identity(2), DenseMat::identity(2), c.clone()).unwrap();
        let mut s = IterateState::new(&p, None).unwrap();
        gi_step(&mut s, &p, 1.0).unwrap();
        assert_eq!(s.x, c);
        assert!(gi_step(&mut s, &p, 2.0).is_err());
        let before = s.x.clone();
        gi_step(&mut s, &p, 0.0).unwrap();
        assert_eq!(s.x, before);
    }

    #[test]
    fn transform_examples() {
        // B = [[3],[4]] is 2x1, so A needs two columns.
        let a2 = SparseRowMat::from_dense(&DenseMat::from_rows(&[&[1.0, 1.0]]));
        let p = Problem::new(a2, DenseMat::from_rows(&[&[3.0], &[4.0]]), DenseMat::from_rows(&[&[10.0]])).unwrap();
        let (t, qr) = transform_fullcol(&p).unwrap();
        assert!((qr.r[(0, 0)] - 5.0).abs() < 1e-14);
        assert!((t.c()[(0, 0)] - 2.0).abs() < 1e-14);

        let p = scalar(1.0, 2.0, 6.0);
        let t = transform_fullrow(&p).unwrap();
        assert!((t.c()[(0, 0)] - 3.0).abs() < 1e-14);
        assert!(t.b_is_identity());
    }
}
