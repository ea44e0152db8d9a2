use rand::Rng;
use rand_distr::StandardNormal;

use super::kernel::{GpKernel, KernelKind};
use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Tridiagonal precision `Q = theta * B' D^-1 B` of a Markov Gaussian
/// process sampled at increasing times.
///
/// `B` is unit lower-bidiagonal with `-coef[i]` below the diagonal and `D`
/// holds the unit-precision innovation variances. This factor gives the
/// log-determinant, quadratic form and exact draws in O(d) without forming
/// `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalPrecision {
    theta: f64,
    coef: Vec<f64>,
    var: Vec<f64>,
}

impl TridiagonalPrecision {
    pub fn build(times: &[f64], kernel: &GpKernel) -> Result<Self> {
        let mut p = TridiagonalPrecision {
            theta: kernel.theta,
            coef: Vec::with_capacity(times.len()),
            var: Vec::with_capacity(times.len()),
        };
        p.rebuild(times, kernel.kind, kernel.theta)?;
        Ok(p)
    }

    /// Refill in place for new times, reusing the allocations.
    pub fn rebuild(&mut self, times: &[f64], kind: KernelKind, theta: f64) -> Result<()> {
        self.theta = theta;
        self.coef.clear();
        self.var.clear();
        let mut prev: Option<f64> = None;
        for &t in times {
            let (a, v) = match prev {
                None => (0.0, kind.unit_marginal_variance(t)),
                Some(s) if t > s => kind.unit_transition(s, t),
                Some(s) => {
                    return Err(Error::domain(format!(
                        "times must be strictly increasing ({s} then {t})"
                    )))
                }
            };
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::evaluation(format!(
                    "precision is not positive definite at time {t} (innovation variance {v})"
                )));
            }
            self.coef.push(a);
            self.var.push(v);
            prev = Some(t);
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.var.len()
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn set_theta(&mut self, theta: f64) {
        self.theta = theta;
    }

    /// Main diagonal of `Q`.
    pub fn diagonal(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|i| {
                let mut q = 1.0 / self.var[i];
                if i + 1 < d {
                    q += self.coef[i + 1] * self.coef[i + 1] / self.var[i + 1];
                }
                self.theta * q
            })
            .collect()
    }

    /// First off-diagonal of `Q` (entry `i` couples points `i` and `i + 1`).
    pub fn off_diagonal(&self) -> Vec<f64> {
        (1..self.dim())
            .map(|i| -self.theta * self.coef[i] / self.var[i])
            .collect()
    }

    /// Dense copy of `Q`; for tests and small diagnostics only.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut q = vec![vec![0.0; d]; d];
        for (i, v) in self.diagonal().into_iter().enumerate() {
            q[i][i] = v;
        }
        for (i, v) in self.off_diagonal().into_iter().enumerate() {
            q[i][i + 1] = v;
            q[i + 1][i] = v;
        }
        q
    }

    /// `f' Q(1) f`, the quadratic form at unit precision.
    pub fn unit_quadratic_form(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.dim());
        let mut acc = 0.0;
        let mut prev = 0.0;
        for ((&x, &a), &v) in f.iter().zip(&self.coef).zip(&self.var) {
            let r = x - a * prev;
            acc += r * r / v;
            prev = x;
        }
        acc
    }

    pub fn quadratic_form(&self, f: &[f64]) -> f64 {
        self.theta * self.unit_quadratic_form(f)
    }

    pub fn log_det(&self) -> f64 {
        self.dim() as f64 * self.theta.ln() - self.var.iter().map(|v| v.ln()).sum::<f64>()
    }

    /// Log density of `N(0, Q^-1)` at `f`.
    pub fn log_density(&self, f: &[f64]) -> f64 {
        0.5 * self.log_det() - 0.5 * self.dim() as f64 * LN_2PI - 0.5 * self.quadratic_form(f)
    }

    /// Exact draw from `N(0, Q^-1)` by forward substitution through `B`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim());
        let scale = self.theta.recip();
        let mut prev = 0.0;
        for ((o, &a), &v) in out.iter_mut().zip(&self.coef).zip(&self.var) {
            let z: f64 = rng.sample(StandardNormal);
            *o = a * prev + (v * scale).sqrt() * z;
            prev = *o;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brownian_three_points_pinned_at_zero() {
        let k = GpKernel::new(KernelKind::BrownianMotion { initial_variance: 0.0 }, 1.0).unwrap();
        let q = TridiagonalPrecision::build(&[1.0, 2.0, 3.0], &k).unwrap();
        let dense = q.to_dense();
        let want = [[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((dense[i][j] - want[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn single_point_precision() {
        let k = GpKernel::new(KernelKind::BrownianMotion { initial_variance: 0.0 }, 2.0).unwrap();
        let q = TridiagonalPrecision::build(&[1.0], &k).unwrap();
        assert_eq!(q.diagonal(), vec![2.0]);
    }

    #[test]
    fn duplicate_times_rejected() {
        let k = GpKernel::new(KernelKind::brownian(), 1.0).unwrap();
        assert!(matches!(
            TridiagonalPrecision::build(&[1.0, 1.0], &k),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn degenerate_start_is_an_evaluation_error() {
        let k = GpKernel::new(KernelKind::BrownianMotion { initial_variance: 0.0 }, 1.0).unwrap();
        assert!(matches!(
            TridiagonalPrecision::build(&[0.0, 1.0], &k),
            Err(Error::Evaluation(_))
        ));
    }

    #[test]
    fn zero_vector_density() {
        let k = GpKernel::new(KernelKind::ornstein_uhlenbeck(0.7), 1.5).unwrap();
        let q = TridiagonalPrecision::build(&[0.1, 0.4, 2.0, 2.2], &k).unwrap();
        let want = 0.5 * q.log_det() - 2.0 * LN_2PI;
        assert!((q.log_density(&[0.0; 4]) - want).abs() < 1e-12);
    }

    #[test]
    fn scalar_density_by_hand() {
        let k = GpKernel::new(KernelKind::BrownianMotion { initial_variance: 0.0 }, 1.0).unwrap();
        let q = TridiagonalPrecision::build(&[1.0], &k).unwrap();
        let want = -0.5 - 0.5 * LN_2PI;
        assert!((q.log_density(&[1.0]) - want).abs() < 1e-14);
    }
}
