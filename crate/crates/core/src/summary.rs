//! Posterior summaries of `N_e(t)` on a grid, and accuracy metrics against
//! a known truth.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{predictive_grid_draw, GpKernel, KernelKind};
use crate::likelihood::ne_from_f;
use crate::mcmc::{ChainOutput, Draw};
use crate::rng::{stream, Component};

pub const DEFAULT_GRID_SIZE: usize = 150;

/// Pointwise posterior median and 95% band of `N_e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub grid: Vec<f64>,
    pub median: Vec<f64>,
    pub lo95: Vec<f64>,
    pub hi95: Vec<f64>,
    /// Grid points beyond the root of the genealogy.
    pub extrapolated: Vec<bool>,
    pub draws: usize,
}

impl PosteriorSummary {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,median,lo95,hi95,extrapolated\n");
        for i in 0..self.grid.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.grid[i], self.median[i], self.lo95[i], self.hi95[i], self.extrapolated[i] as u8
            ));
        }
        out
    }
}

/// `k` equally spaced points covering `[0, end]`.
pub fn regular_grid(end: f64, k: usize) -> Result<Vec<f64>> {
    if k < 2 || !(end > 0.0) || !end.is_finite() {
        return Err(Error::validation("a regular grid needs at least 2 points and a positive end"));
    }
    Ok((0..k).map(|i| end * i as f64 / (k - 1) as f64).collect())
}

/// Type-7 quantile (linear interpolation between order statistics) of
/// sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

/// Summarize a chain on `grid`; each draw's predictive values come from
/// its own random stream, keyed by `seed` and the draw's iteration.
pub fn summarize(chain: &ChainOutput, grid: &[f64], seed: u64) -> Result<PosteriorSummary> {
    summarize_chains(std::slice::from_ref(chain), grid, seed)
}

/// Pool the draws of several chains run on the same data and kernel.
pub fn summarize_chains(chains: &[ChainOutput], grid: &[f64], seed: u64) -> Result<PosteriorSummary> {
    let first = chains.first().ok_or_else(|| Error::runtime("no chains to summarize"))?;
    if chains
        .iter()
        .any(|c| c.header.data != first.header.data || c.header.kernel != first.header.kernel)
    {
        return Err(Error::validation("pooled chains must share their data and kernel"));
    }
    let keyed: Vec<(u64, &Draw)> = chains
        .iter()
        .flat_map(|c| c.draws.iter().map(move |d| ((c.header.chain << 40) | d.iteration as u64, d)))
        .collect();
    summarize_keyed(&keyed, first.header.kernel, first.header.data.tmrca(), grid, seed)
}

pub fn summarize_draws(draws: &[Draw], kind: KernelKind, tmrca: f64, grid: &[f64], seed: u64) -> Result<PosteriorSummary> {
    let keyed: Vec<(u64, &Draw)> = draws.iter().map(|d| (d.iteration as u64, d)).collect();
    summarize_keyed(&keyed, kind, tmrca, grid, seed)
}

fn summarize_keyed(draws: &[(u64, &Draw)], kind: KernelKind, tmrca: f64, grid: &[f64], seed: u64) -> Result<PosteriorSummary> {
    if draws.is_empty() {
        return Err(Error::runtime("chain has no draws to summarize"));
    }
    if grid.is_empty() {
        return Err(Error::validation("summary grid is empty"));
    }
    if grid.iter().any(|&g| !(g >= 0.0) || !g.is_finite()) {
        return Err(Error::validation("grid times must be finite and non-negative"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation("grid must be strictly increasing"));
    }
    let per_draw: Vec<Vec<f64>> = draws
        .par_iter()
        .map(|&(key, d)| {
            let kernel = GpKernel::new(kind, d.theta)?;
            let mut rng = stream(seed, Component::Summary, key);
            let f = predictive_grid_draw(&d.field()?, grid, &kernel, &mut rng)?;
            Ok(f.into_iter().map(|x| ne_from_f(x, d.lambda)).collect())
        })
        .collect::<Result<_>>()?;
    let k = grid.len();
    let mut median = Vec::with_capacity(k);
    let mut lo95 = Vec::with_capacity(k);
    let mut hi95 = Vec::with_capacity(k);
    let mut column = Vec::with_capacity(draws.len());
    for i in 0..k {
        column.clear();
        column.extend(per_draw.iter().map(|row| row[i]));
        column.sort_by(f64::total_cmp);
        median.push(quantile_sorted(&column, 0.5));
        lo95.push(quantile_sorted(&column, 0.025));
        hi95.push(quantile_sorted(&column, 0.975));
    }
    Ok(PosteriorSummary {
        grid: grid.to_vec(),
        median,
        lo95,
        hi95,
        extrapolated: grid.iter().map(|&g| g > tmrca).collect(),
        draws: draws.len(),
    })
}

fn same_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::validation(format!("length mismatch ({a} vs {b})")));
    }
    if a == 0 {
        return Err(Error::validation("metrics need at least one grid point"));
    }
    Ok(())
}

/// Sum of relative errors `sum |est - truth| / truth`.
pub fn sre(est: &[f64], truth: &[f64]) -> Result<f64> {
    same_len(est.len(), truth.len())?;
    Ok(est.iter().zip(truth).map(|(e, t)| (e - t).abs() / t).sum())
}

/// Mean relative width `sum (upper - lower) / (K * truth)`.
pub fn mrw(lower: &[f64], upper: &[f64], truth: &[f64]) -> Result<f64> {
    same_len(lower.len(), truth.len())?;
    same_len(upper.len(), truth.len())?;
    let k = truth.len() as f64;
    Ok(lower.iter().zip(upper).zip(truth).map(|((l, u), t)| (u - l) / (k * t)).sum())
}

/// Fraction of grid points whose band covers the truth.
pub fn envelope(lower: &[f64], upper: &[f64], truth: &[f64]) -> Result<f64> {
    same_len(lower.len(), truth.len())?;
    same_len(upper.len(), truth.len())?;
    let covered = lower
        .iter()
        .zip(upper)
        .zip(truth)
        .filter(|((l, u), t)| *l <= *t && *t <= *u)
        .count();
    Ok(covered as f64 / truth.len() as f64)
}

/// Total variation `sum |est[i+1] - est[i]|` over a regular grid.
pub fn variation(est: &[f64]) -> Result<f64> {
    if est.len() < 2 {
        return Err(Error::validation("variation needs at least two grid points"));
    }
    Ok(est.windows(2).map(|w| (w[1] - w[0]).abs()).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub sre: f64,
    pub mrw: f64,
    pub envelope: f64,
    pub variation: f64,
    pub k: usize,
}

impl MetricReport {
    /// Score a summary against the true trajectory on its grid.
    pub fn compute(summary: &PosteriorSummary, truth: &[f64]) -> Result<Self> {
        Ok(Self {
            sre: sre(&summary.median, truth)?,
            mrw: mrw(&summary.lo95, &summary.hi95, truth)?,
            envelope: envelope(&summary.lo95, &summary.hi95, truth)?,
            variation: variation(&summary.median)?,
            k: truth.len(),
        })
    }
}
