use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imaging::blur::CrossChannelMatrix;
use crate::imaging::image::RgbImage;
use crate::linalg::{DenseMat, SparseRowMat};
use crate::solvers::{solve, Method, Problem, SolveReport, SolverConfig};

/// Packs the planes as the columns `(vec R, vec G, vec B)` of an `hw x 3`
/// matrix.
pub fn channels_to_columns(img: &RgbImage) -> DenseMat {
    let n = img.height() * img.width();
    DenseMat::from_fn(n, 3, |r, c| img.plane(c)[r])
}

fn unpack(m: &DenseMat, height: usize, width: usize, clamp: bool) -> Result<RgbImage> {
    if m.shape() != (height * width, 3) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix cannot hold a {height}x{width} colour image",
            m.rows(),
            m.cols()
        )));
    }
    let planes = [0, 1, 2].map(|c| {
        m.column(c)
            .into_iter()
            .map(|v| if clamp { v.clamp(0.0, 1.0) } else { v })
            .collect::<Vec<f64>>()
    });
    RgbImage::from_planes(height, width, planes)
}

/// Inverse of [`channels_to_columns`]; fails if any value leaves `[0, 1]`.
pub fn columns_to_channels(m: &DenseMat, height: usize, width: usize) -> Result<RgbImage> {
    unpack(m, height, width, false)
}

/// As [`columns_to_channels`] but clamps intensities to `[0, 1]`.
pub fn columns_to_channels_clamped(m: &DenseMat, height: usize, width: usize) -> Result<RgbImage> {
    unpack(m, height, width, true)
}

/// Noise-free observation `C = A X A_c^T`.
pub fn forward_blur(img: &RgbImage, a: &SparseRowMat, ac: &CrossChannelMatrix) -> Result<DenseMat> {
    let n = img.height() * img.width();
    if a.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "blur matrix is {}x{}, image has {n} pixels",
            a.rows(),
            a.cols()
        )));
    }
    Ok(a.mul_dense(&channels_to_columns(img)).matmul_t(ac.matrix()))
}

/// Peak signal-to-noise ratio with peak 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Psnr {
    /// The images are identical.
    Exact,
    Db(f64),
}

impl Psnr {
    /// Decibels, `+inf` for identical images.
    pub fn value(self) -> f64 {
        match self {
            Psnr::Exact => f64::INFINITY,
            Psnr::Db(v) => v,
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Exact => f.write_str("exact"),
            Psnr::Db(v) => write!(f, "{v:.2} dB"),
        }
    }
}

/// `10 log10(1 / MSE)` over all three channels jointly.
pub fn psnr(reference: &RgbImage, test: &RgbImage) -> Result<Psnr> {
    if (reference.height(), reference.width()) != (test.height(), test.width()) {
        return Err(Error::DimensionMismatch("images differ in size".into()));
    }
    let mut sse = 0.0;
    for c in 0..3 {
        sse += reference
            .plane(c)
            .iter()
            .zip(test.plane(c))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    if sse == 0.0 {
        return Ok(Psnr::Exact);
    }
    let mse = sse / (3 * reference.height() * reference.width()) as f64;
    Ok(Psnr::Db(-10.0 * mse.log10()))
}

/// Blur operator pair `(A, A_c)` for images of a fixed size.
#[derive(Clone, Debug)]
pub struct BlurModel {
    pub a: SparseRowMat,
    pub ac: CrossChannelMatrix,
    pub height: usize,
    pub width: usize,
}

impl BlurModel {
    pub fn new(a: SparseRowMat, ac: CrossChannelMatrix, height: usize, width: usize) -> Result<Self> {
        let n = height * width;
        if a.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "blur matrix is {}x{}, image has {n} pixels",
                a.rows(),
                a.cols()
            )));
        }
        Ok(Self { a, ac, height, width })
    }

    pub fn forward(&self, img: &RgbImage) -> Result<DenseMat> {
        forward_blur(img, &self.a, &self.ac)
    }

    /// The blurred observation as an image, clamped to `[0, 1]`.
    pub fn observed_image(&self, observed: &DenseMat) -> Result<RgbImage> {
        columns_to_channels_clamped(observed, self.height, self.width)
    }
}

/// Restores an image from the observation `C = A X A_c^T`.
///
/// When `reference` is given it becomes the solution used by the `rse`
/// stopping rule. The iteration runs on unclamped values; only the returned
/// image is clamped to `[0, 1]`.
pub fn deblur(
    observed: &DenseMat,
    model: &BlurModel,
    reference: Option<&RgbImage>,
    method: Method,
    config: &SolverConfig,
) -> Result<(RgbImage, SolveReport)> {
    let mut problem = Problem::new(model.a.clone(), model.ac.matrix().transpose(), observed.clone())?;
    if let Some(r) = reference {
        if (r.height(), r.width()) != (model.height, model.width) {
            return Err(Error::DimensionMismatch("reference image size differs".into()));
        }
        problem = problem.with_x_star(channels_to_columns(r))?;
    }
    let report = solve(&problem, method, config)?;
    let img = columns_to_channels_clamped(&report.x, model.height, model.width)?;
    Ok((img, report))
}

/// Peak-to-peak amplitude of the fine texture in [`synthetic_image`].
pub const SYNTHETIC_TEXTURE: f64 = 0.3;

/// Synthetic test image: smooth per-channel gradients with phase shifts,
/// overlaid rectangles and a disc, plus seeded uniform fine texture of
/// amplitude [`SYNTHETIC_TEXTURE`]; values are clamped to `[0, 1]`.
/// `variant` changes phases, geometry and the texture seed.
pub fn synthetic_image(height: usize, width: usize, variant: usize) -> Result<RgbImage> {
    let v = variant as f64;
    let (hf, wf) = (height as f64, width as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ variant as u64);
    let texture: Vec<f64> = (0..3 * height * width)
        .map(|_| SYNTHETIC_TEXTURE * (rng.random::<f64>() - 0.5))
        .collect();
    RgbImage::from_fn(height, width, |c, i, j| {
        let noise = texture[(c * width + j) * height + i];
        let (y, x) = (i as f64 / hf, j as f64 / wf);
        let phase = 2.0 * PI * (c as f64 / 3.0 + 0.17 * v);
        let mut val = 0.5 + 0.3 * (2.0 * PI * (x + 0.5 * y) + phase).sin() * (PI * y + 0.3 * v).cos();
        let (r0, r1) = (0.15 + 0.05 * (v % 3.0), 0.55 + 0.05 * (v % 2.0));
        if (r0..r0 + 0.3).contains(&y) && (0.2..0.6).contains(&x) {
            val = [0.9, 0.2, 0.4][(c + variant) % 3];
        }
        if (r1..r1 + 0.25).contains(&y) && (0.55..0.9).contains(&x) {
            val = [0.1, 0.8, 0.6][(c + 2 * variant) % 3];
        }
        let (dy, dx) = (y - 0.7, x - 0.25);
        if dy * dy + dx * dx < 0.02 {
            val = [0.3, 0.95, 0.05][(c + variant) % 3];
        }
        val + noise
    })
}

/// A few synthetic images of the given size.
pub fn synthetic_corpus(height: usize, width: usize) -> Result<Vec<RgbImage>> {
    (0..3).map(|v| synthetic_image(height, width, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::blur::{blur_matrix, gaussian_kernel, Boundary};
    use crate::linalg;

    #[test]
    fn packing_round_trip() {
        let img = synthetic_image(5, 4, 1).unwrap();
        let m = channels_to_columns(&img);
        assert_eq!(columns_to_channels(&m, 5, 4).unwrap(), img);
        assert_eq!(m.column(1), linalg::vec(&DenseMat::from_fn(5, 4, |i, j| img.get(1, i, j))));
        let red = RgbImage::from_fn(2, 2, |c, _, _| if c == 0 { 1.0 } else { 0.0 }).unwrap();
        let m = channels_to_columns(&red);
        assert_eq!(m.column(0), vec![1.0; 4]);
        assert_eq!(m.column(2), vec![0.0; 4]);
    }

    #[test]
    fn psnr_examples() {
        let img = RgbImage::from_fn(4, 4, |_, i, j| 0.1 + 0.05 * (i + j) as f64).unwrap();
        assert_eq!(psnr(&img, &img).unwrap(), Psnr::Exact);
        let shifted = RgbImage::from_fn(4, 4, |_, i, j| 0.2 + 0.05 * (i + j) as f64).unwrap();
        assert!((psnr(&img, &shifted).unwrap().value() - 20.0).abs() < 1e-10);
    }

    #[test]
    fn gray_image_collapses_cross_channel_mixing() {
        let gray = RgbImage::from_fn(6, 6, |_, i, j| ((i * 3 + j) % 7) as f64 / 7.0).unwrap();
        let a = blur_matrix(&gaussian_kernel(3, 1.0).unwrap(), 6, 6, Boundary::Reflexive).unwrap();
        let c = forward_blur(&gray, &a, &CrossChannelMatrix::standard()).unwrap();
        let direct = a.mul_vec(gray.plane(0));
        for ch in 0..3 {
            let col = c.column(ch);
            assert!(col.iter().zip(&direct).all(|(x, y)| (x - y).abs() < 1e-14));
        }
    }

    #[test]
    fn identity_blur_is_recovered() {
        let img = synthetic_image(6, 5, 0).unwrap();
        let model = BlurModel::new(SparseRowMat::identity(30), CrossChannelMatrix::identity(), 6, 5).unwrap();
        let c = model.forward(&img).unwrap();
        let cfg = SolverConfig::default();
        let (out, rep) = deblur(&c, &model, Some(&img), Method::Bk, &cfg).unwrap();
        assert!(rep.iterations <= 60);
        assert_eq!(psnr(&img, &out).unwrap(), Psnr::Exact);
    }
}
