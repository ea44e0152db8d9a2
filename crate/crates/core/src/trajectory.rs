//! Deterministic effective population size trajectories.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// A positive function `t -> N_e(t)` of backward time.
pub trait Trajectory: Send + Sync {
    fn ne_at(&self, t: f64) -> f64;

    /// An upper bound on `1 / N_e` over `[a, b]`, if one is known.
    fn inverse_ne_bound(&self, _a: f64, _b: f64) -> Option<f64> {
        None
    }

    /// Closed form of `integral_a^b du / N_e(u)`, if available.
    fn integrated_inverse(&self, _a: f64, _b: f64) -> Option<f64> {
        None
    }
}

/// `integral_a^b du / N_e(u)`, by closed form or adaptive quadrature.
pub fn cumulative_inverse<T: Trajectory + ?Sized>(traj: &T, a: f64, b: f64) -> Result<f64> {
    if let Some(v) = traj.integrated_inverse(a, b) {
        return Ok(v);
    }
    quadrature::integrate(|u| traj.ne_at(u).recip(), a, b, quadrature::DEFAULT_TOLERANCE)
}

/// The built-in scenarios, written `constant:c`, `expgrowth:n0,rate` and
/// `boombust` on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Builtin {
    /// `N_e(t) = c`.
    Constant { value: f64 },
    /// `N_e(t) = n0 * exp(-rate * t)`.
    ExpGrowth { n0: f64, rate: f64 },
    /// `exp(4t)` up to `t = 0.5`, then `exp(3 - 2t)`.
    BoomBust,
}

impl Builtin {
    fn validate(self) -> Result<Self> {
        let ok = match self {
            Builtin::Constant { value } => value > 0.0 && value.is_finite(),
            Builtin::ExpGrowth { n0, rate } => n0 > 0.0 && n0.is_finite() && rate.is_finite(),
            Builtin::BoomBust => true,
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::validation(format!("invalid trajectory parameters: {self}")))
        }
    }
}

impl Trajectory for Builtin {
    fn ne_at(&self, t: f64) -> f64 {
        match *self {
            Builtin::Constant { value } => value,
            Builtin::ExpGrowth { n0, rate } => n0 * (-rate * t).exp(),
            Builtin::BoomBust => {
                if t <= 0.5 {
                    (4.0 * t).exp()
                } else {
                    (3.0 - 2.0 * t).exp()
                }
            }
        }
    }

    fn inverse_ne_bound(&self, a: f64, b: f64) -> Option<f64> {
        // Each built-in 1/N_e is monotone on either side of at most one
        // turning point where it is minimal, so the endpoints dominate.
        Some(self.ne_at(a).recip().max(self.ne_at(b).recip()))
    }

    fn integrated_inverse(&self, a: f64, b: f64) -> Option<f64> {
        Some(match *self {
            Builtin::Constant { value } => (b - a) / value,
            Builtin::ExpGrowth { n0, rate: 0.0 } => (b - a) / n0,
            Builtin::ExpGrowth { n0, rate } => {
                ((rate * b).exp() - (rate * a).exp()) / (rate * n0)
            }
            Builtin::BoomBust => {
                let boom = |x: f64, y: f64| ((-4.0 * x).exp() - (-4.0 * y).exp()) / 4.0;
                let bust = |x: f64, y: f64| ((2.0 * y - 3.0).exp() - (2.0 * x - 3.0).exp()) / 2.0;
                if b <= 0.5 {
                    boom(a, b)
                } else if a >= 0.5 {
                    bust(a, b)
                } else {
                    boom(a, 0.5) + bust(0.5, b)
                }
            }
        })
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Constant { value } => write!(f, "constant:{value}"),
            Builtin::ExpGrowth { n0, rate } => write!(f, "expgrowth:{n0},{rate}"),
            Builtin::BoomBust => write!(f, "boombust"),
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::validation(format!("bad number {x:?} in trajectory {s:?}")))
                })
                .collect::<Result<_>>()?
        };
        let traj = match (name.trim().to_ascii_lowercase().as_str(), nums.as_slice()) {
            ("constant", [c]) => Builtin::Constant { value: *c },
            ("constant", []) => Builtin::Constant { value: 1.0 },
            ("expgrowth", [n0, r]) => Builtin::ExpGrowth { n0: *n0, rate: *r },
            ("expgrowth", []) => Builtin::ExpGrowth { n0: 25.0, rate: 5.0 },
            ("boombust", []) => Builtin::BoomBust,
            _ => {
                return Err(Error::validation(format!(
                    "unknown trajectory {s:?}; expected constant:c, expgrowth:n0,rate or boombust"
                )))
            }
        };
        traj.validate()
    }
}

/// A user-supplied trajectory with a global bound on `1 / N_e`.
pub struct FnTrajectory<F> {
    f: F,
    bound: Option<f64>,
}

impl<F: Fn(f64) -> f64 + Send + Sync> FnTrajectory<F> {
    pub fn new(f: F) -> Self {
        Self { f, bound: None }
    }

    pub fn with_bound(f: F, bound: f64) -> Self {
        Self { f, bound: Some(bound) }
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> Trajectory for FnTrajectory<F> {
    fn ne_at(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    fn inverse_ne_bound(&self, _a: f64, _b: f64) -> Option<f64> {
        self.bound
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_builtins() {
        assert_eq!("constant:1".parse::<Builtin>().unwrap(), Builtin::Constant { value: 1.0 });
        assert_eq!(
            "expgrowth:25,5".parse::<Builtin>().unwrap(),
            Builtin::ExpGrowth { n0: 25.0, rate: 5.0 }
        );
        assert_eq!("boombust".parse::<Builtin>().unwrap(), Builtin::BoomBust);
        assert!("constant:-1".parse::<Builtin>().is_err());
        assert!("logistic:1".parse::<Builtin>().is_err());
        let b = Builtin::ExpGrowth { n0: 25.0, rate: 5.0 };
        assert_eq!(b.to_string().parse::<Builtin>().unwrap(), b);
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let cases = [
            Builtin::Constant { value: 2.5 },
            Builtin::ExpGrowth { n0: 25.0, rate: 5.0 },
            Builtin::BoomBust,
        ];
        for traj in cases {
            for (a, b) in [(0.0, 0.3), (0.2, 0.9), (0.5, 1.7), (0.0, 2.0)] {
                let exact = traj.integrated_inverse(a, b).unwrap();
                let numeric = quadrature::integrate(|u| traj.ne_at(u).recip(), a, b, 1e-12).unwrap();
                assert!((exact - numeric).abs() < 1e-10, "{traj} on [{a}, {b}]");
            }
        }
    }

    #[test]
    fn endpoint_bound_dominates() {
        let traj = Builtin::BoomBust;
        for i in 0..200 {
            let a = i as f64 * 0.01;
            let b = a + 0.05;
            let bound = traj.inverse_ne_bound(a, b).unwrap();
            for j in 0..=50 {
                let t = a + (b - a) * j as f64 / 50.0;
                assert!(traj.ne_at(t).recip() <= bound * (1.0 + 1e-12));
            }
        }
    }
}
