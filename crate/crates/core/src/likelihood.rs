//! Coalescent likelihoods, the sigmoid link, and the prior on the bound
//! `lambda`.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genealogy::{build_interval_grid, CoalescentData, IntervalEnd, IntervalGrid};
use crate::gp::{LatentField, PointKind};
use crate::trajectory::{cumulative_inverse, Trajectory};

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln(1 / (1 + e^-f))`.
#[inline]
pub fn log_sigmoid(f: f64) -> f64 {
    -softplus(-f)
}

/// `N_e = (1 + e^-f) / lambda`; always above `1 / lambda`.
#[inline]
pub fn ne_from_f(f: f64, lambda: f64) -> f64 {
    if f > -700.0 {
        (1.0 + (-f).exp()) / lambda
    } else {
        (softplus(-f) - lambda.ln()).exp()
    }
}

/// `C / N_e(t)` for the interval holding `t`.
pub fn conditional_intensity<F: Fn(f64) -> f64>(t: f64, grid: &IntervalGrid, ne: F) -> Result<f64> {
    let i = grid
        .locate(t)
        .ok_or_else(|| Error::domain(format!("time {t} is outside the genealogy (0, {}]", grid.tmrca())))?;
    let iv = &grid.intervals()[i];
    if iv.factor == 0 {
        return Ok(0.0);
    }
    Ok(iv.factor_f64() / ne(t))
}

/// Log density of the coalescent times given a deterministic trajectory.
pub fn log_coalescent_likelihood<T: Trajectory + ?Sized>(data: &CoalescentData, traj: &T) -> Result<f64> {
    log_coalescent_likelihood_on_grid(&build_interval_grid(data), traj)
}

/// As [`log_coalescent_likelihood`], over a prebuilt grid.
pub fn log_coalescent_likelihood_on_grid<T: Trajectory + ?Sized>(grid: &IntervalGrid, traj: &T) -> Result<f64> {
    let mut total = 0.0;
    for iv in grid.intervals() {
        if iv.factor == 0 {
            continue;
        }
        let c = iv.factor_f64();
        if iv.ends_with == IntervalEnd::Coalescence {
            total += (c / traj.ne_at(iv.end)).ln();
        }
        total -= c * cumulative_inverse(traj, iv.start, iv.end)?;
    }
    if total.is_nan() {
        return Err(Error::evaluation("coalescent likelihood is not a number"));
    }
    Ok(total)
}

/// `sum_coal ln sigmoid(f) + sum_latent ln(1 - sigmoid(f))`: the part of
/// the augmented likelihood that depends on `f`.
pub fn log_acceptance_terms(kinds: &[PointKind], values: &[f64]) -> f64 {
    kinds
        .iter()
        .zip(values)
        .map(|(k, &f)| match k {
            PointKind::Coalescent => log_sigmoid(f),
            PointKind::Latent => -softplus(f),
        })
        .sum()
}

/// Joint log density of the coalescent times, the thinned points and the
/// thinning decisions, given `f` at all of them and the bound `lambda`.
pub fn log_augmented_likelihood(grid: &IntervalGrid, field: &LatentField, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::domain("lambda must be positive"));
    }
    let times = field.times();
    let kinds = field.kinds();
    let mut j = 0;
    let mut total = 0.0;
    for iv in grid.intervals() {
        let mut latent = 0usize;
        while j < times.len() && times[j] < iv.end {
            if times[j] <= iv.start || kinds[j] != PointKind::Latent {
                return Err(Error::validation(format!(
                    "field point at {} does not match the genealogy",
                    times[j]
                )));
            }
            latent += 1;
            j += 1;
        }
        let closes = iv.ends_with == IntervalEnd::Coalescence;
        if closes {
            if j == times.len() || times[j] != iv.end || kinds[j] != PointKind::Coalescent {
                return Err(Error::validation(format!(
                    "field has no value at the coalescent time {}",
                    iv.end
                )));
            }
            j += 1;
        }
        total += interval_term(iv.factor_f64(), iv.len(), latent + closes as usize, lambda);
    }
    if j != times.len() {
        return Err(Error::validation(format!(
            "field point at {} lies beyond the root",
            times[j]
        )));
    }
    total += log_acceptance_terms(kinds, field.values());
    Ok(total)
}

/// `points * ln(lambda C) - lambda C len` for one interval.
#[inline]
pub(crate) fn interval_term(factor: f64, len: f64, points: usize, lambda: f64) -> f64 {
    if factor == 0.0 {
        return if points == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let rate = lambda * factor;
    points as f64 * rate.ln() - rate * len
}

/// Mixture prior on `lambda`: uniform on `(0, lambda_hat)` with mass
/// `epsilon` and a shifted exponential tail of mean `lambda_hat` beyond it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaPrior {
    pub lambda_hat: f64,
    pub epsilon: f64,
}

impl LambdaPrior {
    pub fn new(lambda_hat: f64, epsilon: f64) -> Result<Self> {
        if !(lambda_hat > 0.0) || !lambda_hat.is_finite() {
            return Err(Error::validation("lambda_hat must be positive"));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::validation("epsilon must lie in (0, 1)"));
        }
        Ok(Self { lambda_hat, epsilon })
    }

    pub fn log_density(&self, lambda: f64) -> f64 {
        lambda_log_prior(lambda, self)
    }

    pub fn cdf(&self, lambda: f64) -> f64 {
        let h = self.lambda_hat;
        if lambda <= 0.0 {
            0.0
        } else if lambda < h {
            self.epsilon * lambda / h
        } else {
            self.epsilon - (1.0 - self.epsilon) * (-(lambda - h) / h).exp_m1()
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if rng.random::<f64>() < self.epsilon {
            self.lambda_hat * (1.0 - rng.random::<f64>())
        } else {
            let e: f64 = Exp1.sample(rng);
            self.lambda_hat * (1.0 + e)
        }
    }
}

/// Log density of [`LambdaPrior`]; `-inf` for `lambda <= 0`.
pub fn lambda_log_prior(lambda: f64, prior: &LambdaPrior) -> f64 {
    let h = prior.lambda_hat;
    if !(lambda > 0.0) {
        f64::NEG_INFINITY
    } else if lambda < h {
        (prior.epsilon / h).ln()
    } else {
        ((1.0 - prior.epsilon) / h).ln() - (lambda - h) / h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::Builtin;

    #[test]
    fn sigmoid_link() {
        assert_eq!(ne_from_f(0.0, 2.0), 1.0);
        assert!((ne_from_f(3f64.ln(), 1.0) - 4.0 / 3.0).abs() < 1e-15);
        assert!((ne_from_f(800.0, 4.0) - 0.25).abs() < 1e-15);
        assert!(ne_from_f(-800.0, 4.0).is_infinite());
        assert!((softplus(-800.0)).abs() < 1e-300);
        assert_eq!(softplus(800.0), 800.0);
    }

    #[test]
    fn intensity_lookup() {
        let d = CoalescentData::new(vec![0.0, 0.3, 1.0], vec![0.0, 0.5], vec![2, 1]).unwrap();
        let g = build_interval_grid(&d);
        let ne = |t: f64| 1.0 + t;
        assert_eq!(conditional_intensity(0.4, &g, ne).unwrap(), 0.0);
        assert!((conditional_intensity(0.7, &g, ne).unwrap() - 1.0 / 1.7).abs() < 1e-15);
        assert!(conditional_intensity(1.2, &g, ne).is_err());
        let iso = build_interval_grid(&CoalescentData::isochronous(vec![0.0, 0.3, 1.0]).unwrap());
        assert_eq!(conditional_intensity(0.1, &iso, |_| 1.0).unwrap(), 3.0);
    }

    #[test]
    fn coalescent_likelihood_hand_values() {
        let one = Builtin::Constant { value: 1.0 };
        let d = CoalescentData::isochronous(vec![0.0, 1.0]).unwrap();
        assert!((log_coalescent_likelihood(&d, &one).unwrap() + 1.0).abs() < 1e-15);
        let d = CoalescentData::new(vec![0.0, 0.3, 1.0], vec![0.0, 0.5], vec![2, 1]).unwrap();
        assert!((log_coalescent_likelihood(&d, &one).unwrap() + 0.8).abs() < 1e-15);
    }

    #[test]
    fn augmented_hand_values() {
        let d = CoalescentData::isochronous(vec![0.0, 1.0]).unwrap();
        let g = build_interval_grid(&d);
        let field = LatentField::observed(&[1.0], vec![0.0]).unwrap();
        let base = log_augmented_likelihood(&g, &field, 2.0).unwrap();
        assert!((base + 2.0).abs() < 1e-15);
        let mut with_latent = field.clone();
        with_latent.insert(0.4, 0.0, PointKind::Latent).unwrap();
        let v = log_augmented_likelihood(&g, &with_latent, 2.0).unwrap();
        assert!((v - base - (2f64.ln() + 0.5f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn augmented_rejects_bad_fields() {
        let d = CoalescentData::isochronous(vec![0.0, 0.5, 1.0]).unwrap();
        let g = build_interval_grid(&d);
        let missing = LatentField::observed(&[1.0], vec![0.0]).unwrap();
        assert!(log_augmented_likelihood(&g, &missing, 1.0).is_err());
        let mut beyond = LatentField::observed(&[0.5, 1.0], vec![0.0, 0.0]).unwrap();
        beyond.insert(1.5, 0.0, PointKind::Latent).unwrap();
        assert!(log_augmented_likelihood(&g, &beyond, 1.0).is_err());
    }

    #[test]
    fn lambda_prior_branches() {
        let p = LambdaPrior::new(10.0, 0.01).unwrap();
        assert!((lambda_log_prior(5.0, &p) - 0.001f64.ln()).abs() < 1e-15);
        assert!((lambda_log_prior(10.0, &p) - 0.099f64.ln()).abs() < 1e-15);
        assert_eq!(lambda_log_prior(0.0, &p), f64::NEG_INFINITY);
        assert_eq!(lambda_log_prior(-1.0, &p), f64::NEG_INFINITY);
        assert!((p.cdf(10.0) - 0.01).abs() < 1e-15);
        assert!((p.cdf(1e6) - 1.0).abs() < 1e-12);
    }
}
