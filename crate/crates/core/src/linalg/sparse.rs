use crate::error::{Error, Result};
use crate::linalg::dense::{axpy, DenseMat};

/// Compressed sparse row matrix.
///
/// Column indices are strictly increasing within a row and explicit zeros are
/// never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseRowMat {
    rows: usize,
    cols: usize,
    row_starts: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

/// Borrowed view of one CSR row.
#[derive(Clone, Copy, Debug)]
pub struct SparseRow<'a> {
    pub indices: &'a [usize],
    pub values: &'a [f64],
}

impl SparseRow<'_> {
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }
}

impl SparseRowMat {
    /// Validates raw CSR arrays.
    pub fn new(
        rows: usize,
        cols: usize,
        row_starts: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_starts.len() != rows + 1 {
            return Err(Error::Invalid(format!(
                "row_starts has length {}, expected {}",
                row_starts.len(),
                rows + 1
            )));
        }
        if row_starts[0] != 0 || *row_starts.last().unwrap() != col_indices.len() {
            return Err(Error::Invalid("row_starts does not span the stored entries".into()));
        }
        if col_indices.len() != values.len() {
            return Err(Error::Invalid("col_indices and values differ in length".into()));
        }
        for i in 0..rows {
            let (s, e) = (row_starts[i], row_starts[i + 1]);
            if s > e {
                return Err(Error::Invalid(format!("row_starts decreases at row {i}")));
            }
            let idx = &col_indices[s..e];
            if idx.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Invalid(format!("column indices of row {i} not strictly increasing")));
            }
            if idx.last().is_some_and(|&c| c >= cols) {
                return Err(Error::Invalid(format!("column index out of range in row {i}")));
            }
            for (k, v) in values[s..e].iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite(i, idx[k]));
                }
                if *v == 0.0 {
                    return Err(Error::Invalid(format!("explicit zero stored at ({i}, {})", idx[k])));
                }
            }
        }
        Ok(Self {
            rows,
            cols,
            row_starts,
            col_indices,
            values,
        })
    }

    /// Assembles from `(row, col, value)` triplets; duplicates are summed and
    /// resulting zeros dropped.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= rows || j >= cols {
                return Err(Error::Invalid(format!("entry ({i}, {j}) outside {rows}x{cols}")));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite(i, j));
            }
            sorted.push((i, j, v));
        }
        sorted.sort_by_key(|a| (a.0, a.1));

        let mut row_starts = vec![0usize; rows + 1];
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut k = 0;
        while k < sorted.len() {
            let (i, j, mut v) = sorted[k];
            k += 1;
            while k < sorted.len() && sorted[k].0 == i && sorted[k].1 == j {
                v += sorted[k].2;
                k += 1;
            }
            if v != 0.0 {
                col_indices.push(j);
                values.push(v);
                row_starts[i + 1] += 1;
            }
        }
        for i in 0..rows {
            row_starts[i + 1] += row_starts[i];
        }
        Self::new(rows, cols, row_starts, col_indices, values)
    }

    pub fn from_dense(m: &DenseMat) -> Self {
        let mut row_starts = Vec::with_capacity(m.rows() + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_starts.push(0);
        for i in 0..m.rows() {
            for (j, &v) in m.row(i).iter().enumerate() {
                if v != 0.0 {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_starts.push(col_indices.len());
        }
        Self {
            rows: m.rows(),
            cols: m.cols(),
            row_starts,
            col_indices,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            row_starts: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_starts(&self) -> &[usize] {
        &self.row_starts
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> SparseRow<'_> {
        let (s, e) = (self.row_starts[i], self.row_starts[i + 1]);
        SparseRow {
            indices: &self.col_indices[s..e],
            values: &self.values[s..e],
        }
    }

    /// Stored entry at `(i, j)`, zero when absent.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = self.row(i);
        row.indices
            .binary_search(&j)
            .map(|k| row.values[k])
            .unwrap_or(0.0)
    }

    /// `||A_{i,:}||^2` for every row.
    pub fn row_norms_squared(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).norm_sq()).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Stored nonzeros divided by `rows * cols`.
    pub fn density(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        self.nnz() as f64 / (self.rows as f64 * self.cols as f64)
    }

    /// Index of the first row with zero norm, if any.
    pub fn first_zero_row(&self) -> Option<usize> {
        (0..self.rows).find(|&i| self.row(i).nnz() == 0)
    }

    pub fn to_dense(&self) -> DenseMat {
        let mut d = DenseMat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row(i).iter() {
                d[(i, j)] = v;
            }
        }
        d
    }

    pub fn transpose(&self) -> SparseRowMat {
        let mut counts = vec![0usize; self.cols + 1];
        for &j in &self.col_indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.cols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.rows {
            for (j, v) in self.row(i).iter() {
                let pos = next[j];
                col_indices[pos] = i;
                values[pos] = v;
                next[j] += 1;
            }
        }
        SparseRowMat {
            rows: self.cols,
            cols: self.rows,
            row_starts: counts,
            col_indices,
            values,
        }
    }

    /// Sparse product `self * other`. Numerical cancellations are dropped.
    pub fn sparse_mul(&self, other: &SparseRowMat) -> SparseRowMat {
        assert_eq!(self.cols, other.rows, "sparse_mul: inner dimensions differ");
        let mut acc = vec![0.0; other.cols];
        let mut mark = vec![usize::MAX; other.cols];
        let mut touched: Vec<usize> = Vec::new();
        let mut row_starts = Vec::with_capacity(self.rows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_starts.push(0);
        for i in 0..self.rows {
            touched.clear();
            for (k, a) in self.row(i).iter() {
                for (j, b) in other.row(k).iter() {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                if acc[j] != 0.0 {
                    col_indices.push(j);
                    values.push(acc[j]);
                }
            }
            row_starts.push(col_indices.len());
        }
        SparseRowMat {
            rows: self.rows,
            cols: other.cols,
            row_starts,
            col_indices,
            values,
        }
    }

    /// Gram matrix `A A^T` in CSR form. Row `i` equals column `i`.
    pub fn gram(&self) -> SparseRowMat {
        self.sparse_mul(&self.transpose())
    }

    /// `A * M` for dense `M`.
    pub fn mul_dense(&self, m: &DenseMat) -> DenseMat {
        assert_eq!(self.cols, m.rows(), "mul_dense: inner dimensions differ");
        let mut out = DenseMat::zeros(self.rows, m.cols());
        for i in 0..self.rows {
            let out_row = out.row_mut(i);
            for (k, a) in self.row(i).iter() {
                axpy(a, m.row(k), out_row);
            }
        }
        out
    }

    /// `A^T * M` for dense `M`.
    pub fn t_mul_dense(&self, m: &DenseMat) -> DenseMat {
        assert_eq!(self.rows, m.rows(), "t_mul_dense: inner dimensions differ");
        let mut out = DenseMat::zeros(self.cols, m.cols());
        for i in 0..self.rows {
            let src = m.row(i);
            for (k, a) in self.row(i).iter() {
                axpy(a, src, out.row_mut(k));
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn t_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            for (j, v) in self.row(i).iter() {
                out[j] += v * yi;
            }
        }
        out
    }

    /// `D A` for a diagonal `D` given by its entries.
    pub fn scale_rows(&self, d: &[f64]) -> SparseRowMat {
        assert_eq!(d.len(), self.rows);
        let mut out = self.clone();
        for i in 0..self.rows {
            let (s, e) = (self.row_starts[i], self.row_starts[i + 1]);
            for v in &mut out.values[s..e] {
                *v *= d[i];
            }
        }
        out
    }

    /// Row `k` of the result is row `perm[k]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> SparseRowMat {
        assert_eq!(perm.len(), self.rows);
        let mut row_starts = Vec::with_capacity(self.rows + 1);
        let mut col_indices = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        row_starts.push(0);
        for &src in perm {
            let r = self.row(src);
            col_indices.extend_from_slice(r.indices);
            values.extend_from_slice(r.values);
            row_starts.push(col_indices.len());
        }
        SparseRowMat {
            rows: self.rows,
            cols: self.cols,
            row_starts,
            col_indices,
            values,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_norms_small_cases() {
        assert_eq!(SparseRowMat::identity(3).row_norms_squared(), vec![1.0, 1.0, 1.0]);
        let a = SparseRowMat::from_dense(&DenseMat::from_rows(&[&[1.0, 2.0], &[0.0, 3.0]]));
        assert_eq!(a.row_norms_squared(), vec![5.0, 9.0]);
        let z = SparseRowMat::from_dense(&DenseMat::from_rows(&[&[1.0, 2.0], &[0.0, 0.0]]));
        assert_eq!(z.row_norms_squared(), vec![5.0, 0.0]);
        assert_eq!(z.first_zero_row(), Some(1));
    }

    #[test]
    fn density_cases() {
        assert!((SparseRowMat::identity(3).density() - 1.0 / 3.0).abs() < 1e-15);
        let d = DenseMat::from_fn(4, 5, |i, j| 1.0 + (i * 5 + j) as f64);
        assert_eq!(SparseRowMat::from_dense(&d).density(), 1.0);
    }

    #[test]
    fn validation_rejects_bad_csr() {
        assert!(SparseRowMat::new(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]).is_err());
        assert!(SparseRowMat::new(1, 3, vec![0, 1], vec![1], vec![0.0]).is_err());
        assert!(SparseRowMat::new(2, 3, vec![0, 1], vec![1], vec![1.0]).is_err());
        assert!(SparseRowMat::new(1, 3, vec![0, 1], vec![3], vec![1.0]).is_err());
    }

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let a = SparseRowMat::from_triplets(2, 2, &[(0, 1, 2.0), (0, 1, 3.0), (1, 0, 1.0), (1, 0, -1.0)]).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 1), 5.0);
        assert_eq!(a.get(1, 0), 0.0);
    }

    #[test]
    fn transpose_and_gram_match_dense() {
        let d = DenseMat::from_rows(&[&[1.0, 0.0, 2.0], &[0.0, 3.0, 0.0], &[4.0, 5.0, 0.0]]);
        let a = SparseRowMat::from_dense(&d);
        assert_eq!(a.transpose().to_dense(), d.transpose());
        assert_eq!(a.gram().to_dense(), d.matmul_t(&d));
        let m = DenseMat::from_rows(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]);
        assert_eq!(a.mul_dense(&m), d.matmul(&m));
        assert_eq!(a.t_mul_dense(&m), d.transpose().matmul(&m));
    }
}
