//! Exact Gaussian conditional draws that exploit the Markov property: a new
//! point depends only on its nearest stored neighbors.

use rand::Rng;
use rand_distr::StandardNormal;

use super::field::LatentField;
use super::kernel::GpKernel;
use crate::error::{Error, Result};

/// Mean and variance of `f(t)` given the nearest known values on either side.
#[inline]
pub fn conditional_moments(
    kernel: &GpKernel,
    t: f64,
    left: Option<(f64, f64)>,
    right: Option<(f64, f64)>,
) -> (f64, f64) {
    let (m0, v0) = match left {
        Some((tl, fl)) => {
            let (a, v) = kernel.transition(tl, t);
            (a * fl, v)
        }
        None => (0.0, kernel.marginal_variance(t)),
    };
    match right {
        None => (m0, v0),
        Some((tr, fr)) => {
            let (a, v) = kernel.transition(t, tr);
            let prec = 1.0 / v0 + a * a / v;
            let mean = (m0 / v0 + a * fr / v) / prec;
            (mean, 1.0 / prec)
        }
    }
}

#[inline]
pub fn draw_between<R: Rng + ?Sized>(
    kernel: &GpKernel,
    t: f64,
    left: Option<(f64, f64)>,
    right: Option<(f64, f64)>,
    rng: &mut R,
) -> f64 {
    let (mean, var) = conditional_moments(kernel, t, left, right);
    let z: f64 = rng.sample(StandardNormal);
    mean + var.sqrt() * z
}

/// Joint draw of `f` on an increasing grid given the field. Grid points that
/// coincide with field times return the stored value.
pub fn predictive_grid_draw<R: Rng + ?Sized>(
    field: &LatentField,
    grid: &[f64],
    kernel: &GpKernel,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("grid must be strictly increasing"));
    }
    let times = field.times();
    let values = field.values();
    let mut out = Vec::with_capacity(grid.len());
    let mut j = 0;
    let mut last_drawn: Option<(f64, f64)> = None;
    for &g in grid {
        while j < times.len() && times[j] < g {
            j += 1;
        }
        if j < times.len() && times[j] == g {
            out.push(values[j]);
            last_drawn = Some((g, values[j]));
            continue;
        }
        let field_left = j.checked_sub(1).map(|i| (times[i], values[i]));
        let left = match (field_left, last_drawn) {
            (Some(a), Some(b)) => Some(if b.0 > a.0 { b } else { a }),
            (a, b) => a.or(b),
        };
        let right = times.get(j).map(|&t| (t, values[j]));
        let f = draw_between(kernel, g, left, right, rng);
        out.push(f);
        last_drawn = Some((g, f));
    }
    Ok(out)
}

/// Joint draw of `f` at `new_times` (any order, disjoint from the field).
pub fn conditional_draw<R: Rng + ?Sized>(
    field: &LatentField,
    new_times: &[f64],
    kernel: &GpKernel,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if new_times.iter().any(|&t| field.search(t).is_ok()) {
        return Err(Error::domain("new times must be disjoint from the field times"));
    }
    let mut order: Vec<usize> = (0..new_times.len()).collect();
    order.sort_by(|&a, &b| new_times[a].total_cmp(&new_times[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| new_times[i]).collect();
    let drawn = predictive_grid_draw(field, &sorted, kernel, rng)?;
    let mut out = vec![0.0; new_times.len()];
    for (slot, f) in order.into_iter().zip(drawn) {
        out[slot] = f;
    }
    Ok(out)
}

/// Draws `f` forward in time, each value conditioned on the previous one.
/// This is the generative order used by the thinning simulators.
#[derive(Debug, Clone)]
pub struct ForwardSampler {
    kernel: GpKernel,
    last: Option<(f64, f64)>,
}

impl ForwardSampler {
    pub fn new(kernel: GpKernel) -> Self {
        Self { kernel, last: None }
    }

    pub fn draw<R: Rng + ?Sized>(&mut self, t: f64, rng: &mut R) -> f64 {
        debug_assert!(self.last.is_none_or(|(s, _)| t > s));
        let f = draw_between(&self.kernel, t, self.last, None, rng);
        self.last = Some((t, f));
        f
    }
}
