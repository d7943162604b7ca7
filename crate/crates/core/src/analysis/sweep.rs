use crate::error::{Error, Result};
use crate::linalg::{axpy, DenseMat, SparseRowMat};

/// Largest row count for which the sweep operator is formed densely.
pub const SWEEP_MAX_ROWS: usize = 2000;

/// `L_alpha = slt(A A^T) + alpha^{-1} diag(A A^T)`, the lower-triangular
/// matrix whose inverse expresses a whole cyclic sweep.
#[derive(Clone, Debug)]
pub struct SweepOperator {
    l_alpha: DenseMat,
    alpha: f64,
}

impl SweepOperator {
    pub fn l_alpha(&self) -> &DenseMat {
        &self.l_alpha
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.l_alpha.rows()
    }

    /// Forward substitution `L_alpha Y = Z`.
    pub fn solve(&self, z: &DenseMat) -> Result<DenseMat> {
        let m = self.dim();
        if z.rows() != m {
            return Err(Error::DimensionMismatch(format!("right-hand side has {} rows, expected {m}", z.rows())));
        }
        let mut y = z.clone();
        let k = z.cols();
        let mut acc = vec![0.0; k];
        for i in 0..m {
            acc.copy_from_slice(y.row(i));
            let li = self.l_alpha.row(i);
            for (j, &lij) in li[..i].iter().enumerate() {
                if lij != 0.0 {
                    axpy(-lij, y.row(j), &mut acc);
                }
            }
            let d = li[i];
            for (dst, v) in y.row_mut(i).iter_mut().zip(&acc) {
                *dst = v / d;
            }
        }
        Ok(y)
    }
}

/// Builds `L_alpha` for `A` (at most [`SWEEP_MAX_ROWS`] rows, no zero rows).
pub fn build_sweep_operator(a: &SparseRowMat, alpha: f64) -> Result<SweepOperator> {
    let m = a.rows();
    if m > SWEEP_MAX_ROWS {
        return Err(Error::TooLarge(format!("sweep operator for {m} rows (limit {SWEEP_MAX_ROWS})")));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::StepSize { alpha, upper: f64::INFINITY });
    }
    if let Some(i) = a.first_zero_row() {
        return Err(Error::ZeroRow(i));
    }
    let g = a.gram();
    let mut l = DenseMat::zeros(m, m);
    for i in 0..m {
        for (j, v) in g.row(i).iter() {
            if j < i {
                l[(i, j)] = v;
            } else if j == i {
                l[(i, i)] = v / alpha;
            }
        }
    }
    Ok(SweepOperator { l_alpha: l, alpha })
}
