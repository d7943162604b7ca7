use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{DenseMat, SparseRowMat};

/// Largest pixel count for which a blur matrix is assembled.
pub const BLUR_MAX_PIXELS: usize = 1_000_000;

/// Square point-spread function, normalized to unit sum.
#[derive(Clone, Debug, PartialEq)]
pub struct PsfKernel {
    size: usize,
    sigma: f64,
    weights: Vec<f64>,
}

impl PsfKernel {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Row-major `size x size` weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at offset `(dy, dx)` from the centre.
    pub fn at(&self, dy: isize, dx: isize) -> f64 {
        let r = (self.size / 2) as isize;
        self.weights[((dy + r) as usize) * self.size + (dx + r) as usize]
    }

    pub fn center(&self) -> f64 {
        self.at(0, 0)
    }
}

/// Rotationally symmetric Gaussian `w(x, y) ~ exp(-(x^2 + y^2) / (2 sigma^2))`
/// on a centred `size x size` grid.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<PsfKernel> {
    if size == 0 || size % 2 == 0 {
        return Err(Error::Invalid(format!("kernel size must be odd and positive, got {size}")));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Invalid(format!("kernel sigma must be positive, got {sigma}")));
    }
    let r = (size / 2) as isize;
    let mut weights = Vec::with_capacity(size * size);
    for y in -r..=r {
        for x in -r..=r {
            weights.push((-((x * x + y * y) as f64) / (2.0 * sigma * sigma)).exp());
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(PsfKernel { size, sigma, weights })
}

/// How the blur treats pixels outside the image.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Boundary {
    /// Outside pixels are zero.
    Zero,
    /// Half-sample symmetric mirror: `-1 -> 0`, `h -> h - 1`.
    #[default]
    Reflexive,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Zero => "zero",
            Boundary::Reflexive => "reflexive",
        })
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" => Ok(Boundary::Zero),
            "reflexive" | "reflective" | "symmetric" => Ok(Boundary::Reflexive),
            _ => Err(Error::Invalid(format!("unknown boundary '{s}'"))),
        }
    }
}

fn reflect(mut idx: isize, n: isize) -> usize {
    loop {
        if idx < 0 {
            idx = -idx - 1;
        } else if idx >= n {
            idx = 2 * n - idx - 1;
        } else {
            return idx as usize;
        }
    }
}

/// Within-channel blur matrix (`hw x hw`) acting on column-stacked planes:
/// `(A vec X)(i, j) = sum K(dy, dx) X(i - dy, j - dx)`.
pub fn blur_matrix(kernel: &PsfKernel, height: usize, width: usize, boundary: Boundary) -> Result<SparseRowMat> {
    let n = height * width;
    if n == 0 {
        return Err(Error::Invalid("image must have at least one pixel".into()));
    }
    if n > BLUR_MAX_PIXELS {
        return Err(Error::TooLarge(format!("{n} pixels (limit {BLUR_MAX_PIXELS})")));
    }
    let r = (kernel.size / 2) as isize;
    let (h, w) = (height as isize, width as isize);
    let mut triplets = Vec::with_capacity(n * kernel.size * kernel.size);
    for j in 0..w {
        for i in 0..h {
            let row = (i + j * h) as usize;
            for dy in -r..=r {
                for dx in -r..=r {
                    let (si, sj) = (i - dy, j - dx);
                    let src = match boundary {
                        Boundary::Zero => {
                            if si < 0 || si >= h || sj < 0 || sj >= w {
                                continue;
                            }
                            (si + sj * h) as usize
                        }
                        Boundary::Reflexive => reflect(si, h) + reflect(sj, w) * height,
                    };
                    triplets.push((row, src, kernel.at(dy, dx)));
                }
            }
        }
    }
    SparseRowMat::from_triplets(n, n, &triplets)
}

/// Row-stochastic, diagonally dominant `3 x 3` mixing of the colour channels.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossChannelMatrix {
    matrix: DenseMat,
}

impl CrossChannelMatrix {
    pub fn new(matrix: DenseMat) -> Result<Self> {
        if matrix.shape() != (3, 3) {
            return Err(Error::DimensionMismatch("cross-channel matrix must be 3x3".into()));
        }
        for i in 0..3 {
            let row = matrix.row(i);
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::Invalid(format!("row {i} sums to {sum}, expected 1")));
            }
            if (0..3).any(|j| j != i && row[j] >= row[i]) {
                return Err(Error::Invalid(format!("row {i} is not diagonally dominant")));
            }
        }
        Ok(Self { matrix })
    }

    /// `[[0.90, 0.05, 0.05], [0, 0.90, 0.10], [0.05, 0.10, 0.85]]`.
    pub fn standard() -> Self {
        Self {
            matrix: DenseMat::from_rows(&[&[0.90, 0.05, 0.05], &[0.0, 0.90, 0.10], &[0.05, 0.10, 0.85]]),
        }
    }

    pub fn identity() -> Self {
        Self {
            matrix: DenseMat::identity(3),
        }
    }

    pub fn matrix(&self) -> &DenseMat {
        &self.matrix
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_examples() {
        let k = gaussian_kernel(1, 2.0).unwrap();
        assert_eq!(k.weights(), &[1.0]);
        let k = gaussian_kernel(3, 100.0).unwrap();
        assert!(k.weights().iter().all(|w| (w - 1.0 / 9.0).abs() < 1e-3));
        let k = gaussian_kernel(5, 6.0).unwrap();
        let max = k.weights().iter().copied().fold(0.0, f64::max);
        let min = k.weights().iter().copied().fold(1.0, f64::min);
        assert!((max / min - (8.0f64 / 72.0).exp()).abs() < 1e-12);
        assert!((k.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(gaussian_kernel(4, 1.0).is_err());
        assert!(gaussian_kernel(3, 0.0).is_err());
    }

    #[test]
    fn small_blur_matrices() {
        let k = gaussian_kernel(3, 1.0).unwrap();
        let a = blur_matrix(&k, 1, 1, Boundary::Zero).unwrap();
        assert_eq!(a.to_dense(), DenseMat::from_rows(&[&[k.center()]]));
        let a = blur_matrix(&gaussian_kernel(1, 1.0).unwrap(), 3, 2, Boundary::Reflexive).unwrap();
        assert_eq!(a, SparseRowMat::identity(6));
    }

    #[test]
    fn reflexive_rows_sum_to_one() {
        let k = gaussian_kernel(5, 6.0).unwrap();
        let a = blur_matrix(&k, 4, 3, Boundary::Reflexive).unwrap();
        let sums = a.mul_vec(&[1.0; 12]);
        assert!(sums.iter().all(|s| (s - 1.0).abs() < 1e-12));
        let z = blur_matrix(&k, 4, 3, Boundary::Zero).unwrap();
        assert!(z.mul_vec(&[1.0; 12]).iter().all(|&s| s < 1.0));
    }

    #[test]
    fn cross_channel_checks() {
        let m = CrossChannelMatrix::standard();
        assert!(CrossChannelMatrix::new(m.matrix().clone()).is_ok());
        assert!((m.matrix().frobenius_norm() - 1.539480432).abs() < 1e-8);
        let bad = DenseMat::from_rows(&[&[0.4, 0.6, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert!(CrossChannelMatrix::new(bad).is_err());
    }
}
