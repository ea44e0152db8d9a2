//! Coalescent simulation by thinning, and by time transformation as an
//! exact reference.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genealogy::{coalescent_factor, CoalescentData};
use crate::gp::{ForwardSampler, GpKernel, LatentField, PointKind};
use crate::trajectory::{cumulative_inverse, Trajectory};

pub const DEFAULT_PROPOSAL_CAP: u64 = 10_000_000;
pub const DEFAULT_BLOCK_WIDTH: f64 = 0.05;

/// Sampling times (increasing from 0) and the number of lineages added at each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    times: Vec<f64>,
    counts: Vec<usize>,
}

impl Schedule {
    pub fn new(times: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if times.is_empty() || times.len() != counts.len() {
            return Err(Error::validation("schedule needs matching, non-empty times and counts"));
        }
        if times[0] != 0.0 {
            return Err(Error::validation("the first sampling time must be 0"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || !times.iter().all(|t| t.is_finite()) {
            return Err(Error::validation("sampling times must be finite and strictly increasing"));
        }
        if counts.contains(&0) {
            return Err(Error::validation("sample counts must be positive"));
        }
        if counts.iter().sum::<usize>() < 2 {
            return Err(Error::validation("need at least two samples"));
        }
        Ok(Self { times, counts })
    }

    pub fn isochronous(n: usize) -> Result<Self> {
        Self::new(vec![0.0], vec![n])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn num_samples(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// How the dominating rate for thinning is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThinningBound {
    /// A single `lambda >= sup 1/N_e`.
    Constant { lambda: f64 },
    /// Piecewise-constant bounds on consecutive blocks of the given width,
    /// taken from [`Trajectory::inverse_ne_bound`].
    Adaptive { width: f64 },
}

/// A deterministic trajectory with its thinning bound.
#[derive(Clone, Copy)]
pub struct Deterministic<'a> {
    pub traj: &'a dyn Trajectory,
    pub bound: ThinningBound,
    pub proposal_cap: u64,
}

impl<'a> Deterministic<'a> {
    pub fn new(traj: &'a dyn Trajectory, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::validation("thinning bound lambda must be positive"));
        }
        Ok(Self {
            traj,
            bound: ThinningBound::Constant { lambda },
            proposal_cap: DEFAULT_PROPOSAL_CAP,
        })
    }

    pub fn adaptive(traj: &'a dyn Trajectory, width: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::validation("block width must be positive"));
        }
        if traj.inverse_ne_bound(0.0, width).is_none() {
            return Err(Error::validation("trajectory provides no local bound on 1/N_e"));
        }
        Ok(Self {
            traj,
            bound: ThinningBound::Adaptive { width },
            proposal_cap: DEFAULT_PROPOSAL_CAP,
        })
    }

    pub fn with_proposal_cap(mut self, cap: u64) -> Self {
        self.proposal_cap = cap;
        self
    }

    /// Dominating rate valid from `t` up to the returned limit.
    #[inline]
    fn rate_from(&self, t: f64) -> Result<(f64, f64)> {
        match self.bound {
            ThinningBound::Constant { lambda } => Ok((lambda, f64::INFINITY)),
            ThinningBound::Adaptive { width } => {
                let mut end = ((t / width).floor() + 1.0) * width;
                if end <= t {
                    end += width;
                }
                match self.traj.inverse_ne_bound(t, end) {
                    Some(b) if b > 0.0 && b.is_finite() => Ok((b, end)),
                    _ => Err(Error::runtime(format!("no finite bound on 1/N_e over [{t}, {end}]"))),
                }
            }
        }
    }

    #[inline]
    fn accept<R: Rng + ?Sized>(&self, t: f64, lambda: f64, rng: &mut R) -> Result<bool> {
        let u: f64 = rng.random();
        let p = 1.0 / (self.traj.ne_at(t) * lambda);
        if p > 1.0 + 1e-9 {
            return Err(Error::runtime(format!(
                "1/N_e exceeds the thinning bound {lambda} at time {t}; use a larger or adaptive bound"
            )));
        }
        Ok(u <= p)
    }
}

/// A process that supplies `f` at successive proposal times.
pub trait FieldProcess {
    fn draw<R: Rng + ?Sized>(&mut self, t: f64, rng: &mut R) -> f64;
}

impl FieldProcess for ForwardSampler {
    fn draw<R: Rng + ?Sized>(&mut self, t: f64, rng: &mut R) -> f64 {
        ForwardSampler::draw(self, t, rng)
    }
}

/// A degenerate process that is constant in time.
#[derive(Debug, Clone, Copy)]
pub struct FixedField(pub f64);

impl FieldProcess for FixedField {
    fn draw<R: Rng + ?Sized>(&mut self, _t: f64, _rng: &mut R) -> f64 {
        self.0
    }
}

/// Output of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    /// `n` times, from `t_n = 0` to the root.
    pub coal_times: Vec<f64>,
    pub samp_times: Vec<f64>,
    pub samp_counts: Vec<usize>,
    /// `latent[j]`: rejected proposals in `(coal_times[j], coal_times[j + 1])`.
    pub latent: Vec<Vec<f64>>,
    /// `f` at every coalescent and latent point (GP runs only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<LatentField>,
    /// Total proposals drawn, including those past a sampling boundary.
    pub proposals: u64,
}

impl SimulationRecord {
    pub fn data(&self) -> Result<CoalescentData> {
        CoalescentData::new(self.coal_times.clone(), self.samp_times.clone(), self.samp_counts.clone())
    }

    pub fn latent_count(&self) -> usize {
        self.latent.iter().map(Vec::len).sum()
    }
}

fn cap_error(cap: u64, t: f64) -> Error {
    Error::runtime(format!(
        "more than {cap} proposals in one coalescent interval (at time {t}); \
         the thinning bound is far too large or 1/N_e is not integrable to infinity"
    ))
}

#[inline]
fn factor(k: usize) -> f64 {
    coalescent_factor(k as u64).unwrap_or(0) as f64
}

/// Isochronous coalescent under a deterministic trajectory, by thinning.
pub fn simulate_iso_thinning<R: Rng + ?Sized>(n: usize, spec: &Deterministic<'_>, rng: &mut R) -> Result<SimulationRecord> {
    if n < 2 {
        return Err(Error::validation("need at least two samples"));
    }
    let mut coal = Vec::with_capacity(n);
    coal.push(0.0);
    let mut latent = Vec::with_capacity(n - 1);
    let mut proposals = 0;
    let mut t = 0.0;
    for k in (2..=n).rev() {
        let c = factor(k);
        let mut group = Vec::new();
        let mut count = 0u64;
        loop {
            count += 1;
            if count > spec.proposal_cap {
                return Err(cap_error(spec.proposal_cap, t));
            }
            let (lambda, limit) = spec.rate_from(t)?;
            let e: f64 = Exp1.sample(rng);
            let step = e / (c * lambda);
            if t + step >= limit {
                t = limit;
                continue;
            }
            t += step;
            if spec.accept(t, lambda, rng)? {
                break;
            }
            group.push(t);
        }
        proposals += count;
        coal.push(t);
        latent.push(group);
    }
    Ok(SimulationRecord {
        coal_times: coal,
        samp_times: vec![0.0],
        samp_counts: vec![n],
        latent,
        field: None,
        proposals,
    })
}

/// Serially sampled coalescent under a deterministic trajectory, by thinning.
///
/// A proposal that reaches the next sampling time moves the clock there and
/// adds the new lineages; it is never accepted or recorded.
pub fn simulate_hetero_thinning<R: Rng + ?Sized>(
    schedule: &Schedule,
    spec: &Deterministic<'_>,
    rng: &mut R,
) -> Result<SimulationRecord> {
    let n = schedule.num_samples();
    let (samp, counts) = (schedule.times(), schedule.counts());
    let mut coal = Vec::with_capacity(n);
    coal.push(0.0);
    let mut latent = Vec::with_capacity(n - 1);
    let mut proposals = 0;
    let mut t = 0.0;
    let mut lineages = counts[0];
    let mut next = 1;
    for _ in 1..n {
        let mut group = Vec::new();
        let mut count = 0u64;
        loop {
            let boundary = samp.get(next).copied().unwrap_or(f64::INFINITY);
            if lineages < 2 {
                t = boundary;
                lineages += counts[next];
                next += 1;
                continue;
            }
            count += 1;
            if count > spec.proposal_cap {
                return Err(cap_error(spec.proposal_cap, t));
            }
            let c = factor(lineages);
            let (lambda, block_end) = spec.rate_from(t)?;
            let limit = block_end.min(boundary);
            let e: f64 = Exp1.sample(rng);
            let step = e / (c * lambda);
            if t + step >= limit {
                t = limit;
                if limit == boundary {
                    lineages += counts[next];
                    next += 1;
                }
                continue;
            }
            t += step;
            if spec.accept(t, lambda, rng)? {
                break;
            }
            group.push(t);
        }
        proposals += count;
        coal.push(t);
        latent.push(group);
        lineages -= 1;
    }
    Ok(SimulationRecord {
        coal_times: coal,
        samp_times: samp.to_vec(),
        samp_counts: counts.to_vec(),
        latent,
        field: None,
        proposals,
    })
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::validation("lambda must be positive"));
    }
    Ok(())
}

/// Isochronous coalescent with `1/N_e = lambda * sigmoid(f)` and `f` a GP.
pub fn simulate_iso_thinning_gp<R: Rng + ?Sized>(n: usize, kernel: &GpKernel, lambda: f64, rng: &mut R) -> Result<SimulationRecord> {
    simulate_iso_thinning_field(n, &mut ForwardSampler::new(*kernel), lambda, DEFAULT_PROPOSAL_CAP, rng)
}

/// [`simulate_iso_thinning_gp`] for any field process.
pub fn simulate_iso_thinning_field<P: FieldProcess, R: Rng + ?Sized>(
    n: usize,
    process: &mut P,
    lambda: f64,
    cap: u64,
    rng: &mut R,
) -> Result<SimulationRecord> {
    if n < 2 {
        return Err(Error::validation("need at least two samples"));
    }
    check_lambda(lambda)?;
    let mut coal = Vec::with_capacity(n);
    coal.push(0.0);
    let mut latent = Vec::with_capacity(n - 1);
    let (mut ft, mut fv, mut fk) = (Vec::new(), Vec::new(), Vec::new());
    let mut proposals = 0;
    let mut t = 0.0;
    for k in (2..=n).rev() {
        let c = factor(k);
        let mut group = Vec::new();
        let mut count = 0u64;
        loop {
            count += 1;
            if count > cap {
                return Err(cap_error(cap, t));
            }
            let e: f64 = Exp1.sample(rng);
            t += e / (c * lambda);
            let accepted = {
                let u: f64 = rng.random();
                let f = process.draw(t, rng);
                ft.push(t);
                fv.push(f);
                u <= 1.0 / (1.0 + (-f).exp())
            };
            if accepted {
                fk.push(PointKind::Coalescent);
                break;
            }
            fk.push(PointKind::Latent);
            group.push(t);
        }
        proposals += count;
        coal.push(t);
        latent.push(group);
    }
    Ok(SimulationRecord {
        coal_times: coal,
        samp_times: vec![0.0],
        samp_counts: vec![n],
        latent,
        field: Some(LatentField::new(ft, fv, fk)?),
        proposals,
    })
}

/// Serially sampled coalescent with a GP-distributed sigmoid trajectory.
/// Proposals past the next sampling time get no `f` value.
pub fn simulate_hetero_thinning_gp<R: Rng + ?Sized>(
    schedule: &Schedule,
    kernel: &GpKernel,
    lambda: f64,
    rng: &mut R,
) -> Result<SimulationRecord> {
    simulate_hetero_thinning_field(schedule, &mut ForwardSampler::new(*kernel), lambda, DEFAULT_PROPOSAL_CAP, rng)
}

/// [`simulate_hetero_thinning_gp`] for any field process.
pub fn simulate_hetero_thinning_field<P: FieldProcess, R: Rng + ?Sized>(
    schedule: &Schedule,
    process: &mut P,
    lambda: f64,
    cap: u64,
    rng: &mut R,
) -> Result<SimulationRecord> {
    check_lambda(lambda)?;
    let n = schedule.num_samples();
    let (samp, counts) = (schedule.times(), schedule.counts());
    let mut coal = Vec::with_capacity(n);
    coal.push(0.0);
    let mut latent = Vec::with_capacity(n - 1);
    let (mut ft, mut fv, mut fk) = (Vec::new(), Vec::new(), Vec::new());
    let mut proposals = 0;
    let mut t = 0.0;
    let mut lineages = counts[0];
    let mut next = 1;
    for _ in 1..n {
        let mut group = Vec::new();
        let mut count = 0u64;
        loop {
            let boundary = samp.get(next).copied().unwrap_or(f64::INFINITY);
            if lineages < 2 {
                t = boundary;
                lineages += counts[next];
                next += 1;
                continue;
            }
            count += 1;
            if count > cap {
                return Err(cap_error(cap, t));
            }
            let c = factor(lineages);
            let e: f64 = Exp1.sample(rng);
            let step = e / (c * lambda);
            if t + step >= boundary {
                t = boundary;
                lineages += counts[next];
                next += 1;
                continue;
            }
            t += step;
            let accepted = {
                let u: f64 = rng.random();
                let f = process.draw(t, rng);
                ft.push(t);
                fv.push(f);
                u <= 1.0 / (1.0 + (-f).exp())
            };
            if accepted {
                fk.push(PointKind::Coalescent);
                break;
            }
            fk.push(PointKind::Latent);
            group.push(t);
        }
        proposals += count;
        coal.push(t);
        latent.push(group);
        lineages -= 1;
    }
    Ok(SimulationRecord {
        coal_times: coal,
        samp_times: samp.to_vec(),
        samp_counts: counts.to_vec(),
        latent,
        field: Some(LatentField::new(ft, fv, fk)?),
        proposals,
    })
}

/// Smallest `x > start` with `factor * integral_start^x du/N_e(u) = target`.
pub fn invert_cumulative_hazard<T: Trajectory + ?Sized>(traj: &T, start: f64, factor: f64, target: f64) -> Result<f64> {
    if !(target >= 0.0) || !(factor > 0.0) {
        return Err(Error::domain("hazard target must be non-negative and the factor positive"));
    }
    let hazard = |x: f64| -> Result<f64> { Ok(factor * cumulative_inverse(traj, start, x)?) };
    let mut lo = start;
    let mut step = 1.0f64.max(start.abs()) * 1e-3;
    let mut hi = start + step;
    let mut tries = 0;
    while hazard(hi)? < target {
        lo = hi;
        step *= 2.0;
        hi = start + step;
        tries += 1;
        if tries > 200 || !hi.is_finite() {
            return Err(Error::runtime(format!(
                "cumulative hazard from {start} never reaches {target}"
            )));
        }
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if hazard(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Coalescent times by time transformation, consuming one unit
/// exponential per coalescence from `exps`.
pub fn time_transform_from<T: Trajectory + ?Sized, I: Iterator<Item = f64>>(
    schedule: &Schedule,
    traj: &T,
    mut exps: I,
) -> Result<Vec<f64>> {
    let n = schedule.num_samples();
    let (samp, counts) = (schedule.times(), schedule.counts());
    let mut coal = Vec::with_capacity(n);
    coal.push(0.0);
    let mut t = 0.0;
    let mut lineages = counts[0];
    let mut next = 1;
    for _ in 1..n {
        let mut remaining = exps
            .next()
            .ok_or_else(|| Error::validation("not enough exponential draws"))?;
        loop {
            let boundary = samp.get(next).copied();
            if lineages < 2 {
                t = boundary.expect("a valid schedule never strands a single lineage");
                lineages += counts[next];
                next += 1;
                continue;
            }
            let c = factor(lineages);
            if let Some(b) = boundary {
                let h = c * cumulative_inverse(traj, t, b)?;
                if h <= remaining {
                    remaining -= h;
                    t = b;
                    lineages += counts[next];
                    next += 1;
                    continue;
                }
            }
            t = invert_cumulative_hazard(traj, t, c, remaining)?;
            break;
        }
        coal.push(t);
        lineages -= 1;
    }
    Ok(coal)
}

/// Exact draw of coalescent times by inverting the cumulative intensity.
pub fn simulate_time_transform<T: Trajectory + ?Sized, R: Rng + ?Sized>(
    schedule: &Schedule,
    traj: &T,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let exps = std::iter::repeat_with(|| Exp1.sample(&mut *rng));
    time_transform_from(schedule, traj, exps)
}
