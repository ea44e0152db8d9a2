use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::LambdaPrior;

/// `Gamma(alpha, beta)` prior on the GP precision `theta` (rate form).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPrior {
    pub alpha: f64,
    pub beta: f64,
}

impl GammaPrior {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let p = Self { alpha, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite() && self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::validation("Gamma prior needs positive alpha and beta"));
        }
        Ok(())
    }

    /// Log density of `log(theta)` at `log_theta`.
    pub fn log_density_of_log(&self, log_theta: f64) -> f64 {
        self.alpha * self.beta.ln() - statrs::function::gamma::ln_gamma(self.alpha) + self.alpha * log_theta
            - self.beta * log_theta.exp()
    }
}

/// Settings for one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub iterations: usize,
    pub burnin: usize,
    pub thin: usize,
    pub seed: u64,
    pub theta_prior: GammaPrior,
    pub lambda_prior: LambdaPrior,
    /// Half-width of the reflected uniform proposal for `lambda`;
    /// `None` means a tenth of `lambda_hat`.
    pub lambda_half_width: Option<f64>,
    /// Add/remove proposals per interval per iteration.
    pub rj_moves: usize,
    /// Location moves per iteration; `None` means one per latent point.
    pub location_moves: Option<usize>,
    /// Drop every likelihood factor and sample the hyperprior alone.
    pub prior_only: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            iterations: 10_000,
            burnin: 2_000,
            thin: 10,
            seed: 1,
            theta_prior: GammaPrior { alpha: 0.001, beta: 0.001 },
            lambda_prior: LambdaPrior { lambda_hat: 10.0, epsilon: 0.01 },
            lambda_half_width: None,
            rj_moves: 1,
            location_moves: None,
            prior_only: false,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.thin == 0 {
            return Err(Error::validation("iterations and thin must be positive"));
        }
        if self.burnin >= self.iterations {
            return Err(Error::validation("burn-in must be smaller than the iteration count"));
        }
        self.theta_prior.validate()?;
        LambdaPrior::new(self.lambda_prior.lambda_hat, self.lambda_prior.epsilon)?;
        if let Some(a) = self.lambda_half_width {
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::validation("lambda proposal half-width must be positive"));
            }
        }
        Ok(())
    }

    pub fn half_width(&self) -> f64 {
        self.lambda_half_width.unwrap_or(0.1 * self.lambda_prior.lambda_hat)
    }

    /// Number of draws a full run retains.
    pub fn retained(&self) -> usize {
        (self.burnin..self.iterations).filter(|i| (i + 1 - self.burnin).is_multiple_of(self.thin)).count()
    }
}
