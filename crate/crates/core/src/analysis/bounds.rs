use crate::error::{Error, Result};
use crate::linalg::{self, norm2_sq, DenseMat, LinearOperator, SparseRowMat};

/// Spectral quantities of `(A, B)` that every bound needs; compute once and
/// reuse across residual states.
#[derive(Clone, Debug)]
pub struct BoundContext {
    pub row_norms: Vec<f64>,
    pub a_fro_sq: f64,
    pub sigma_min_a: f64,
    pub sigma_min_b: f64,
    pub b_norm: f64,
}

/// Convergence-factor bounds at one residual state.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    /// `1 - (2a - a^2 ||B||^2) sigma_min^2(A) sigma_min^2(B) / ||A||_F^2`.
    pub delta: f64,
    pub delta_k_theta: f64,
    pub varphi_k_theta: f64,
    pub epsilon: f64,
    pub omega_set: Vec<usize>,
    pub theta: f64,
    pub alpha: f64,
    /// All weighted residual ratios coincide; then `epsilon = 1` and
    /// `delta_k_theta = delta`.
    pub degenerate: bool,
}

/// Rows with below-average weighted residual and the mean-to-max ratio.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaSet {
    pub indices: Vec<usize>,
    pub epsilon: f64,
    pub degenerate: bool,
}

impl BoundContext {
    pub fn new(a: &SparseRowMat, b: &DenseMat) -> Result<Self> {
        let row_norms = a.row_norms_squared();
        if let Some(i) = row_norms.iter().position(|&v| v == 0.0) {
            return Err(Error::ZeroRow(i));
        }
        Ok(Self {
            a_fro_sq: row_norms.iter().sum(),
            row_norms,
            sigma_min_a: linalg::sigma_min_positive(a)?,
            sigma_min_b: linalg::sigma_min_positive(b)?,
            b_norm: linalg::spectral_norm(b)?,
        })
    }

    fn gain(&self, alpha: f64) -> Result<f64> {
        let upper = 2.0 / (self.b_norm * self.b_norm);
        if !(alpha > 0.0 && alpha < upper) {
            return Err(Error::StepSize { alpha, upper });
        }
        Ok((2.0 * alpha - alpha * alpha * self.b_norm * self.b_norm)
            * self.sigma_min_a.powi(2)
            * self.sigma_min_b.powi(2))
    }

    pub fn delta(&self, alpha: f64) -> Result<f64> {
        Ok(1.0 - self.gain(alpha)? / self.a_fro_sq)
    }

    pub fn delta_k_theta(&self, alpha: f64, theta: f64, residual_row_norms: &[f64]) -> Result<BoundReport> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Theta(theta));
        }
        let gain = self.gain(alpha)?;
        let omega = omega_from_norms(residual_row_norms, &self.row_norms)?;
        let (outside, inside) = self.row_norms.iter().enumerate().fold((0.0, 0.0), |(o, i), (idx, &w)| {
            if omega.indices.binary_search(&idx).is_ok() {
                (o, i + w)
            } else {
                (o + w, i)
            }
        });
        let varphi = theta / (outside + omega.epsilon * inside) + (1.0 - theta) / self.a_fro_sq;
        Ok(BoundReport {
            delta: 1.0 - gain / self.a_fro_sq,
            delta_k_theta: 1.0 - gain * varphi,
            varphi_k_theta: varphi,
            epsilon: omega.epsilon,
            omega_set: omega.indices,
            theta,
            alpha,
            degenerate: omega.degenerate,
        })
    }
}

/// `delta` for `(A, B, alpha)`.
pub fn delta_bound(a: &SparseRowMat, b: &DenseMat, alpha: f64) -> Result<f64> {
    BoundContext::new(a, b)?.delta(alpha)
}

/// Below-average rows of `||R_i||^2 / ||A_i||^2` (unweighted mean over rows).
pub fn omega_set(residual: &DenseMat, a: &SparseRowMat) -> Result<OmegaSet> {
    if residual.rows() != a.rows() {
        return Err(Error::DimensionMismatch("residual and A row counts differ".into()));
    }
    let r: Vec<f64> = (0..residual.rows()).map(|i| norm2_sq(residual.row(i))).collect();
    omega_from_norms(&r, &a.row_norms_squared())
}

pub fn omega_from_norms(residual_row_norms: &[f64], a_row_norms: &[f64]) -> Result<OmegaSet> {
    if residual_row_norms.len() != a_row_norms.len() || a_row_norms.is_empty() {
        return Err(Error::DimensionMismatch("residual and row norm lengths differ".into()));
    }
    let ratios: Vec<f64> = residual_row_norms.iter().zip(a_row_norms).map(|(r, a)| r / a).collect();
    let max = ratios.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::ZeroResidual);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let indices: Vec<usize> = ratios.iter().enumerate().filter(|(_, &v)| v < mean).map(|(i, _)| i).collect();
    let degenerate = indices.is_empty();
    let epsilon = if degenerate { 1.0 } else { (mean / max).min(1.0) };
    Ok(OmegaSet {
        indices,
        epsilon,
        degenerate,
    })
}

/// Full bound report for residual `R` of `A X B = C`.
pub fn delta_k_theta_bound(
    a: &SparseRowMat,
    b: &DenseMat,
    alpha: f64,
    theta: f64,
    residual: &DenseMat,
) -> Result<BoundReport> {
    if residual.rows() != a.rows() {
        return Err(Error::DimensionMismatch("residual and A row counts differ".into()));
    }
    let r: Vec<f64> = (0..residual.rows()).map(|i| norm2_sq(residual.row(i))).collect();
    BoundContext::new(a, b)?.delta_k_theta(alpha, theta, &r)
}

/// `||A||_F^2` of any operator; handy for checking `varphi >= ||A||_F^{-2}`.
pub fn fro_sq<M: LinearOperator + ?Sized>(m: &M) -> f64 {
    m.frobenius_norm().powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eye2() -> (SparseRowMat, DenseMat) {
        (SparseRowMat::identity(2), DenseMat::identity(1))
    }

    #[test]
    fn delta_identity_example() {
        let (a, b) = eye2();
        assert!((delta_bound(&a, &b, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(delta_bound(&a, &b, 1e-9).unwrap() > 1.0 - 1e-8);
        assert!(delta_bound(&a, &b, 2.0).is_err());
    }

    #[test]
    fn omega_examples() {
        let o = omega_from_norms(&[9.0, 16.0], &[1.0, 1.0]).unwrap();
        assert_eq!(o.indices, vec![0]);
        assert!((o.epsilon - 0.78125).abs() < 1e-15);
        let o = omega_from_norms(&[2.0, 2.0, 2.0], &[1.0, 1.0, 1.0]).unwrap();
        assert!(o.degenerate && o.epsilon == 1.0 && o.indices.is_empty());
        let o = omega_from_norms(&[1.0, 1.0, 1.0, 10.0], &[1.0; 4]).unwrap();
        assert_eq!(o.indices, vec![0, 1, 2]);
    }

    #[test]
    fn delta_k_theta_example() {
        let (a, b) = eye2();
        let r = DenseMat::from_rows(&[&[3.0], &[4.0]]);
        let rep = delta_k_theta_bound(&a, &b, 1.0, 1.0, &r).unwrap();
        assert!((rep.varphi_k_theta - 1.0 / 1.78125).abs() < 1e-15);
        assert!((rep.delta_k_theta - (1.0 - 1.0 / 1.78125)).abs() < 1e-15);
        assert!(rep.delta_k_theta < rep.delta);
        let rep0 = delta_k_theta_bound(&a, &b, 1.0, 0.0, &r).unwrap();
        assert_eq!(rep0.delta_k_theta, rep0.delta);
    }
}
