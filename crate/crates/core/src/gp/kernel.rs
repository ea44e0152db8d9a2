use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Markov Gaussian process families with tridiagonal precision.
///
/// Both are parameterized at unit precision; a [`GpKernel`] scales the
/// covariance by `1/theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelKind {
    /// Brownian motion started from a free level:
    /// `cov(s, t) = (initial_variance + min(s, t)) / theta` for `s, t >= 0`.
    BrownianMotion { initial_variance: f64 },
    /// Stationary Ornstein-Uhlenbeck:
    /// `cov(s, t) = exp(-rate * |s - t|) / theta`.
    OrnsteinUhlenbeck { rate: f64 },
}

impl Default for KernelKind {
    fn default() -> Self {
        KernelKind::brownian()
    }
}

impl KernelKind {
    pub const DEFAULT_INITIAL_VARIANCE: f64 = 100.0;
    pub const DEFAULT_OU_RATE: f64 = 1.0;

    pub fn brownian() -> Self {
        KernelKind::BrownianMotion {
            initial_variance: Self::DEFAULT_INITIAL_VARIANCE,
        }
    }

    pub fn ornstein_uhlenbeck(rate: f64) -> Self {
        KernelKind::OrnsteinUhlenbeck { rate }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelKind::BrownianMotion { initial_variance } if !(initial_variance >= 0.0) || !initial_variance.is_finite() => {
                Err(Error::domain("Brownian initial variance must be finite and non-negative"))
            }
            KernelKind::OrnsteinUhlenbeck { rate } if !(rate > 0.0) || !rate.is_finite() => {
                Err(Error::domain("Ornstein-Uhlenbeck rate must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Variance of `f(t)` at unit precision with nothing observed before `t`.
    #[inline]
    pub fn unit_marginal_variance(&self, t: f64) -> f64 {
        match *self {
            KernelKind::BrownianMotion { initial_variance } => initial_variance + t,
            KernelKind::OrnsteinUhlenbeck { .. } => 1.0,
        }
    }

    /// `f(t) = coef * f(s) + N(0, var)` at unit precision, for `s < t`.
    #[inline]
    pub fn unit_transition(&self, s: f64, t: f64) -> (f64, f64) {
        let dt = t - s;
        match *self {
            KernelKind::BrownianMotion { .. } => (1.0, dt),
            KernelKind::OrnsteinUhlenbeck { rate } => {
                ((-rate * dt).exp(), -(-2.0 * rate * dt).exp_m1())
            }
        }
    }

    /// Unit-precision covariance, for dense reference computations.
    pub fn unit_covariance(&self, s: f64, t: f64) -> f64 {
        match *self {
            KernelKind::BrownianMotion { initial_variance } => initial_variance + s.min(t),
            KernelKind::OrnsteinUhlenbeck { rate } => (-rate * (s - t).abs()).exp(),
        }
    }

    pub fn with_theta(self, theta: f64) -> Result<GpKernel> {
        GpKernel::new(self, theta)
    }
}

/// A kernel family together with its precision parameter `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpKernel {
    pub kind: KernelKind,
    pub theta: f64,
}

impl GpKernel {
    pub fn new(kind: KernelKind, theta: f64) -> Result<Self> {
        kind.validate()?;
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::domain(format!("precision theta must be positive, got {theta}")));
        }
        Ok(Self { kind, theta })
    }

    pub fn covariance(&self, s: f64, t: f64) -> f64 {
        self.kind.unit_covariance(s, t) / self.theta
    }

    #[inline]
    pub fn marginal_variance(&self, t: f64) -> f64 {
        self.kind.unit_marginal_variance(t) / self.theta
    }

    #[inline]
    pub fn transition(&self, s: f64, t: f64) -> (f64, f64) {
        let (a, v) = self.kind.unit_transition(s, t);
        (a, v / self.theta)
    }
}
