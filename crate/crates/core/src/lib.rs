//! Coalescent simulation by thinning and Bayesian inference of effective
//! population size trajectories under a sigmoidal Gaussian-process prior.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod genealogy;
pub mod gp;
pub mod rng;

pub use error::{Error, Result};
pub mod likelihood;
pub mod quadrature;
pub mod simulate;
pub mod trajectory;
pub mod mcmc;
pub mod stats;
pub mod summary;
