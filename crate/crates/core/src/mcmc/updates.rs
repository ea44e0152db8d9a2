//! The individual transition kernels and their acceptance ratios.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::gp::TridiagonalPrecision;
use crate::likelihood::{lambda_log_prior, softplus, LambdaPrior};

/// Log acceptance ratio for adding a thinned point with value `f_new` to an
/// interval of length `len` and factor `factor` that holds `m` points.
#[inline]
pub fn rj_log_acceptance_up(len: f64, lambda: f64, factor: f64, m: usize, f_new: f64) -> f64 {
    len.ln() + lambda.ln() + factor.ln() - ((m + 1) as f64).ln() - softplus(f_new)
}

/// Log acceptance ratio for removing a point with value `f_old` from an
/// interval that holds `m` points (including the one removed).
#[inline]
pub fn rj_log_acceptance_down(len: f64, lambda: f64, factor: f64, m: usize, f_old: f64) -> f64 {
    (m as f64).ln() + softplus(f_old) - len.ln() - lambda.ln() - factor.ln()
}

/// Log acceptance ratio for moving a thinned point whose value changes
/// from `f_old` to `f_new`.
#[inline]
pub fn location_log_acceptance(f_old: f64, f_new: f64) -> f64 {
    softplus(f_old) - softplus(f_new)
}

/// Accept with probability `min(1, exp(log_ratio))`; non-finite ratios are
/// rejected.
#[inline]
pub fn accept<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    if log_ratio.is_nan() || log_ratio == f64::INFINITY {
        return false;
    }
    if log_ratio >= 0.0 {
        return true;
    }
    rng.random::<f64>().ln() < log_ratio
}

/// One elliptical slice transition for `f ~ N(0, Q^-1)` with log
/// likelihood `log_lik`. Returns the number of likelihood evaluations.
pub fn ess_step<R, L>(
    f: &mut [f64],
    prior: &TridiagonalPrecision,
    mut log_lik: L,
    nu: &mut Vec<f64>,
    proposal: &mut Vec<f64>,
    rng: &mut R,
) -> usize
where
    R: Rng + ?Sized,
    L: FnMut(&[f64]) -> f64,
{
    let d = f.len();
    nu.resize(d, 0.0);
    proposal.resize(d, 0.0);
    prior.sample_into(rng, nu);
    let u: f64 = rng.random();
    let threshold = log_lik(f) + (1.0 - u).ln();
    let mut angle = rng.random::<f64>() * TAU;
    let (mut lo, mut hi) = (angle - TAU, angle);
    let mut evaluations = 0;
    loop {
        let (s, c) = angle.sin_cos();
        for ((p, &x), &v) in proposal.iter_mut().zip(f.iter()).zip(nu.iter()) {
            *p = x * c + v * s;
        }
        evaluations += 1;
        let l = log_lik(proposal);
        if l > threshold {
            f.copy_from_slice(proposal);
            return evaluations;
        }
        if angle < 0.0 {
            lo = angle;
        } else {
            hi = angle;
        }
        if hi - lo < 1e-12 {
            // Bracket collapsed onto the current point.
            return evaluations;
        }
        angle = lo + rng.random::<f64>() * (hi - lo);
    }
}

/// Full-conditional parameters of `theta` for `d` field points whose
/// unit-precision quadratic form is `q`.
#[inline]
pub fn theta_conditional(alpha: f64, beta: f64, d: usize, q: f64) -> (f64, f64) {
    (alpha + 0.5 * d as f64, beta + 0.5 * q)
}

/// `log(X)` for `X ~ Gamma(shape, rate)`, accurate for tiny shapes where
/// `X` itself underflows.
pub fn sample_log_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        let g: f64 = Gamma::new(shape, 1.0).expect("positive shape").sample(rng);
        g.ln() - rate.ln()
    } else {
        let g: f64 = Gamma::new(shape + 1.0, 1.0).expect("positive shape").sample(rng);
        let u: f64 = rng.random();
        g.ln() + (1.0 - u).ln() / shape - rate.ln()
    }
}

/// Reflected uniform proposal `|lambda + U(-a, a)|`.
#[inline]
pub fn propose_lambda<R: Rng + ?Sized>(lambda: f64, half_width: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    (lambda + half_width * (2.0 * u - 1.0)).abs()
}

/// Log acceptance ratio for `lambda -> proposed` with `points` field
/// points and total exposure `sum C * len`.
pub fn lambda_log_acceptance(lambda: f64, proposed: f64, prior: &LambdaPrior, points: usize, exposure: f64) -> f64 {
    if !(proposed > 0.0) {
        return f64::NEG_INFINITY;
    }
    let mut r = lambda_log_prior(proposed, prior) - lambda_log_prior(lambda, prior);
    if points > 0 {
        r += points as f64 * (proposed / lambda).ln();
    }
    r - (proposed - lambda) * exposure
}
