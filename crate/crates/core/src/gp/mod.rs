//! Gaussian-process prior on the latent function `f(t)`.

mod draw;
mod field;
mod kernel;
mod precision;

pub use draw::{conditional_draw, conditional_moments, draw_between, predictive_grid_draw, ForwardSampler};
pub use field::{LatentField, PointKind};
pub use kernel::{GpKernel, KernelKind};
pub use precision::TridiagonalPrecision;

use crate::error::Result;

pub fn build_precision(times: &[f64], kernel: &GpKernel) -> Result<TridiagonalPrecision> {
    TridiagonalPrecision::build(times, kernel)
}

/// Log prior density of the field values under the kernel, in O(d).
pub fn log_prior_density(field: &LatentField, kernel: &GpKernel) -> Result<f64> {
    Ok(TridiagonalPrecision::build(field.times(), kernel)?.log_density(field.values()))
}
