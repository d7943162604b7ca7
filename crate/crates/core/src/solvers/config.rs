use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::DenseMat;

/// Iteration scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Cyclic rows on the original equation.
    Bk,
    /// Cyclic rows on `A X Q = C R^{-1}` (B of full column rank).
    BkFullCol,
    /// Cyclic rows on `A X = C B^T (B B^T)^{-1}` (B of full row rank).
    BkFullRow,
    /// Rows drawn with probability proportional to `||A_i||^2`.
    Rbk,
    /// Greedy randomized selection with an even max/average blend.
    Grbk,
    /// Greedy randomized selection with blend `theta`.
    Rgrbk,
    /// Maximal weighted residual, smallest index on ties.
    Mwrbk,
    /// Full-gradient iteration.
    Gi,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Bk,
        Method::BkFullCol,
        Method::BkFullRow,
        Method::Rbk,
        Method::Grbk,
        Method::Rgrbk,
        Method::Mwrbk,
        Method::Gi,
    ];

    pub fn is_randomized(self) -> bool {
        matches!(self, Method::Rbk | Method::Grbk | Method::Rgrbk)
    }

    pub fn is_greedy(self) -> bool {
        matches!(self, Method::Grbk | Method::Rgrbk | Method::Mwrbk)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Bk => "BK",
            Method::BkFullCol => "BK_FULLCOL",
            Method::BkFullRow => "BK_FULLROW",
            Method::Rbk => "RBK",
            Method::Grbk => "GRBK",
            Method::Rgrbk => "RGRBK",
            Method::Mwrbk => "MWRBK",
            Method::Gi => "GI",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| Error::Invalid(format!("unknown method '{s}'")))
    }
}

/// Step size selection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSize {
    /// `||B||^{-2}` for row methods (on the transformed `B` for the full-rank
    /// variants), `||A||^{-2} ||B||^{-2}` for the gradient iteration.
    Auto,
    Fixed(f64),
}

impl FromStr for StepSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("auto") {
            return Ok(StepSize::Auto);
        }
        s.trim()
            .parse::<f64>()
            .map(StepSize::Fixed)
            .map_err(|_| Error::Invalid(format!("invalid step size '{s}'")))
    }
}

/// When to stop iterating.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopRule {
    /// `||X^k - X*||_F / ||X*||_F <= tol`; needs a reference solution.
    RseBelow(f64),
    /// Norm of the last rank-one (or gradient) update `<= tol`.
    UpdateNormBelow(f64),
    /// Update norm below `1e-8 * ||C||_F / ||A||_F`.
    DefaultUpdateNorm,
    /// `||C - A X B||_F <= tol`. Row methods without a maintained residual
    /// evaluate it once per sweep of `m` steps.
    ResidualFroBelow(f64),
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule::DefaultUpdateNorm
    }
}

impl fmt::Display for StopRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopRule::RseBelow(t) => write!(f, "rse:{t:e}"),
            StopRule::UpdateNormBelow(t) => write!(f, "update:{t:e}"),
            StopRule::DefaultUpdateNorm => write!(f, "update:auto"),
            StopRule::ResidualFroBelow(t) => write!(f, "residual:{t:e}"),
        }
    }
}

impl FromStr for StopRule {
    type Err = Error;

    /// Parses `rule:tol` with rule one of `rse`, `update`, `residual`; the
    /// update rule also accepts `auto`.
    fn from_str(s: &str) -> Result<Self> {
        let (rule, tol) = s
            .split_once(':')
            .ok_or_else(|| Error::Invalid(format!("stop rule '{s}' is not of the form rule:tol")))?;
        let rule = rule.trim().to_ascii_lowercase();
        if rule == "update" && tol.trim().eq_ignore_ascii_case("auto") {
            return Ok(StopRule::DefaultUpdateNorm);
        }
        let tol: f64 = tol
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("invalid tolerance in '{s}'")))?;
        if !(tol >= 0.0) || !tol.is_finite() {
            return Err(Error::Invalid(format!("tolerance must be finite and nonnegative in '{s}'")));
        }
        match rule.as_str() {
            "rse" => Ok(StopRule::RseBelow(tol)),
            "update" => Ok(StopRule::UpdateNormBelow(tol)),
            "residual" | "res" => Ok(StopRule::ResidualFroBelow(tol)),
            _ => Err(Error::Invalid(format!("unknown stop rule '{rule}'"))),
        }
    }
}

/// Solver parameters shared by every method.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub alpha: StepSize,
    /// Max/average blend for `Rgrbk`; ignored elsewhere.
    pub theta: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub stop: StopRule,
    /// Recompute the maintained residual from scratch every this many steps;
    /// zero disables the refresh.
    pub residual_refresh_every: usize,
    /// Trace stride; `None` uses `max(1, max_iters / 10^4)`, `Some(0)` records
    /// only the final step.
    pub trace_stride: Option<usize>,
    /// Initial guess; the zero matrix when absent.
    pub x0: Option<DenseMat>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: StepSize::Auto,
            theta: 0.5,
            max_iters: 500_000,
            seed: 0,
            stop: StopRule::default(),
            residual_refresh_every: 10_000,
            trace_stride: None,
            x0: None,
        }
    }
}

impl SolverConfig {
    pub fn with_stop(mut self, stop: StopRule) -> Self {
        self.stop = stop;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_alpha(mut self, alpha: StepSize) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_x0(mut self, x0: DenseMat) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn with_trace_stride(mut self, stride: usize) -> Self {
        self.trace_stride = Some(stride);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::Theta(self.theta));
        }
        if let StepSize::Fixed(a) = self.alpha {
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::StepSize { alpha: a, upper: f64::NAN });
            }
        }
        Ok(())
    }

    pub(crate) fn trace_stride(&self) -> usize {
        self.trace_stride.unwrap_or((self.max_iters / 10_000).max(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_methods_and_rules() {
        assert_eq!("mwrbk".parse::<Method>().unwrap(), Method::Mwrbk);
        assert_eq!("bk-fullcol".parse::<Method>().unwrap(), Method::BkFullCol);
        assert!("kaczmarz".parse::<Method>().is_err());
        assert_eq!("rse:1e-6".parse::<StopRule>().unwrap(), StopRule::RseBelow(1e-6));
        assert_eq!("update:auto".parse::<StopRule>().unwrap(), StopRule::DefaultUpdateNorm);
        assert_eq!("residual:0.5".parse::<StopRule>().unwrap(), StopRule::ResidualFroBelow(0.5));
        assert!("rse".parse::<StopRule>().is_err());
        assert!("rse:-1".parse::<StopRule>().is_err());
        assert_eq!("auto".parse::<StepSize>().unwrap(), StepSize::Auto);
        assert_eq!("0.25".parse::<StepSize>().unwrap(), StepSize::Fixed(0.25));
    }

    #[test]
    fn theta_range_is_checked() {
        assert!(SolverConfig::default().with_theta(1.5).validate().is_err());
        assert!(SolverConfig::default().with_theta(1.0).validate().is_ok());
        assert!(SolverConfig::default().with_alpha(StepSize::Fixed(-1.0)).validate().is_err());
    }
}
