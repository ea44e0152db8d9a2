use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::McmcConfig;
use super::output::{ChainHeader, ChainOutput, Draw};
use super::state::{ChainState, Layout};
use super::updates::{
    accept, ess_step, lambda_log_acceptance, location_log_acceptance, propose_lambda, rj_log_acceptance_down,
    rj_log_acceptance_up, sample_log_gamma, theta_conditional,
};
use crate::error::{Error, Result};
use crate::genealogy::{build_interval_grid, CoalescentData, IntervalGrid};
use crate::gp::{draw_between, GpKernel, KernelKind, PointKind, TridiagonalPrecision};
use crate::likelihood::{interval_term, lambda_log_prior, log_acceptance_terms, LambdaPrior};
use crate::rng::{stream, Component};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Counter {
    pub proposed: u64,
    pub accepted: u64,
}

impl Counter {
    #[inline]
    fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += accepted as u64;
    }

    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// Proposal and acceptance counts per move type.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MoveStats {
    pub rj_add: Counter,
    pub rj_remove: Counter,
    pub location: Counter,
    pub lambda: Counter,
    pub ess_calls: u64,
    pub ess_evaluations: u64,
}

/// Acceptance rates reported with a chain.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceRates {
    pub rj_add: f64,
    pub rj_remove: f64,
    pub location: f64,
    pub lambda: f64,
    /// Mean likelihood evaluations per elliptical slice step.
    pub ess_evaluations: f64,
}

impl MoveStats {
    pub fn rates(&self) -> AcceptanceRates {
        AcceptanceRates {
            rj_add: self.rj_add.rate(),
            rj_remove: self.rj_remove.rate(),
            location: self.location.rate(),
            lambda: self.lambda.rate(),
            ess_evaluations: if self.ess_calls == 0 {
                0.0
            } else {
                self.ess_evaluations as f64 / self.ess_calls as f64
            },
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Scratch {
    times: Vec<f64>,
    values: Vec<f64>,
    kinds: Vec<PointKind>,
    nu: Vec<f64>,
    proposal: Vec<f64>,
    cumulative: Vec<f64>,
    nonempty: Vec<usize>,
}

/// The augmented-posterior sampler for one genealogy.
#[derive(Debug, Clone)]
pub struct Sampler {
    grid: IntervalGrid,
    layout: Layout,
    kind: KernelKind,
    config: McmcConfig,
    lambda_prior: LambdaPrior,
    state: ChainState,
    stats: MoveStats,
    precision: TridiagonalPrecision,
    scratch: Scratch,
}

impl Sampler {
    pub fn new(grid: IntervalGrid, kind: KernelKind, config: McmcConfig, state: ChainState) -> Result<Self> {
        config.validate()?;
        kind.validate()?;
        let layout = Layout::new(&grid);
        if state.latent.len() != grid.len() || state.coal_f.len() != layout.coal_times.len() {
            return Err(Error::validation("chain state does not match the interval grid"));
        }
        let lambda_prior = LambdaPrior::new(config.lambda_prior.lambda_hat, config.lambda_prior.epsilon)?;
        let precision = TridiagonalPrecision::build(&[], &GpKernel::new(kind, 1.0)?)?;
        Ok(Self {
            grid,
            layout,
            kind,
            config,
            lambda_prior,
            state,
            stats: MoveStats::default(),
            precision,
            scratch: Scratch::default(),
        })
    }

    /// Start from `f = 0`, no thinned points, `theta` at its prior mean
    /// (or 1 if that is extreme) and `lambda = lambda_hat`.
    pub fn with_default_start(grid: IntervalGrid, kind: KernelKind, config: McmcConfig) -> Result<Self> {
        let mean = config.theta_prior.alpha / config.theta_prior.beta;
        let theta = if (1e-6..=1e6).contains(&mean) { mean } else { 1.0 };
        let state = ChainState::initial(&grid, theta, config.lambda_prior.lambda_hat)?;
        Self::new(grid, kind, config, state)
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn grid(&self) -> &IntervalGrid {
        &self.grid
    }

    pub fn stats(&self) -> &MoveStats {
        &self.stats
    }

    pub fn config(&self) -> &McmcConfig {
        &self.config
    }

    /// Replace the data and state, keeping the counters.
    pub fn reset(&mut self, grid: IntervalGrid, state: ChainState) -> Result<()> {
        let layout = Layout::new(&grid);
        if state.latent.len() != grid.len() || state.coal_f.len() != layout.coal_times.len() {
            return Err(Error::validation("chain state does not match the interval grid"));
        }
        self.grid = grid;
        self.layout = layout;
        self.state = state;
        Ok(())
    }

    fn kernel(&self) -> GpKernel {
        GpKernel {
            kind: self.kind,
            theta: self.state.theta(),
        }
    }

    /// One full iteration: add/remove, locations, slice sampling of `f`,
    /// then `theta` and `lambda`.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        if !self.config.prior_only {
            for _ in 0..self.config.rj_moves {
                for i in 0..self.grid.len() {
                    self.rj_update(i, rng);
                }
            }
            self.location_update(rng);
            self.ess_update(rng)?;
        }
        self.gibbs_theta(rng)?;
        self.mh_lambda(rng);
        Ok(())
    }

    /// Add or remove one thinned point in interval `i`.
    pub fn rj_update<R: Rng + ?Sized>(&mut self, i: usize, rng: &mut R) {
        let iv = self.grid.intervals()[i];
        let (len, factor) = (iv.len(), iv.factor_f64());
        let lambda = self.state.lambda;
        let m = self.state.latent[i].len();
        if rng.random::<bool>() {
            if factor == 0.0 || !(len > 0.0) {
                self.stats.rj_add.record(false);
                return;
            }
            let t = iv.start + len * rng.random::<f64>();
            let group = &self.state.latent[i];
            let pos = group.partition_point(|p| p.0 < t);
            if t <= iv.start || t >= iv.end || group.get(pos).is_some_and(|p| p.0 == t) {
                self.stats.rj_add.record(false);
                return;
            }
            let (left, right) = self.state.neighbors(&self.layout, i, t);
            let f = draw_between(&self.kernel(), t, left, right, rng);
            let ok = accept(rj_log_acceptance_up(len, lambda, factor, m, f), rng);
            if ok {
                self.state.latent[i].insert(pos, (t, f));
            }
            self.stats.rj_add.record(ok);
        } else {
            if m == 0 {
                self.stats.rj_remove.record(false);
                return;
            }
            let j = rng.random_range(0..m);
            let f = self.state.latent[i][j].1;
            let ok = accept(rj_log_acceptance_down(len, lambda, factor, m, f), rng);
            if ok {
                self.state.latent[i].remove(j);
            }
            self.stats.rj_remove.record(ok);
        }
    }

    /// Move thinned points: pick a non-empty interval with probability
    /// proportional to its length and one of its points uniformly, then
    /// redraw the point's time and value.
    pub fn location_update<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let total_latent = self.state.latent_count();
        if total_latent == 0 {
            return;
        }
        let moves = self.config.location_moves.unwrap_or(total_latent);
        let sc = &mut self.scratch;
        sc.cumulative.clear();
        sc.nonempty.clear();
        let mut acc = 0.0;
        for (i, group) in self.state.latent.iter().enumerate() {
            if !group.is_empty() {
                acc += self.grid.intervals()[i].len();
                sc.cumulative.push(acc);
                sc.nonempty.push(i);
            }
        }
        let kernel = self.kernel();
        for _ in 0..moves {
            let u = rng.random::<f64>() * acc;
            let k = self.scratch.cumulative.partition_point(|&c| c <= u).min(self.scratch.nonempty.len() - 1);
            let i = self.scratch.nonempty[k];
            let iv = self.grid.intervals()[i];
            let m = self.state.latent[i].len();
            let j = rng.random_range(0..m);
            let (t_old, f_old) = self.state.latent[i].remove(j);
            let t = iv.start + iv.len() * rng.random::<f64>();
            let group = &self.state.latent[i];
            let pos = group.partition_point(|p| p.0 < t);
            let valid = t > iv.start && t < iv.end && !group.get(pos).is_some_and(|p| p.0 == t);
            let mut ok = false;
            if valid {
                let (left, right) = self.state.neighbors(&self.layout, i, t);
                let f = draw_between(&kernel, t, left, right, rng);
                ok = accept(location_log_acceptance(f_old, f), rng);
                if ok {
                    self.state.latent[i].insert(pos, (t, f));
                }
            }
            if !ok {
                self.state.latent[i].insert(j, (t_old, f_old));
            }
            self.stats.location.record(ok);
        }
    }

    /// Elliptical slice update of `f` at every field point.
    pub fn ess_update<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let sc = &mut self.scratch;
        self.state.flatten(&self.layout, &mut sc.times, &mut sc.values, &mut sc.kinds);
        if sc.values.is_empty() {
            return Ok(());
        }
        self.precision.rebuild(&sc.times, self.kind, self.state.theta())?;
        let kinds = &sc.kinds;
        let evals = ess_step(
            &mut sc.values,
            &self.precision,
            |f| log_acceptance_terms(kinds, f),
            &mut sc.nu,
            &mut sc.proposal,
            rng,
        );
        self.stats.ess_calls += 1;
        self.stats.ess_evaluations += evals as u64;
        self.state.scatter(&self.layout, &sc.values);
        Ok(())
    }

    /// Draw `theta` from its Gamma full conditional.
    pub fn gibbs_theta<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let prior = self.config.theta_prior;
        let (d, q) = if self.config.prior_only {
            (0, 0.0)
        } else {
            let sc = &mut self.scratch;
            self.state.flatten(&self.layout, &mut sc.times, &mut sc.values, &mut sc.kinds);
            self.precision.rebuild(&sc.times, self.kind, 1.0)?;
            (sc.values.len(), self.precision.unit_quadratic_form(&sc.values))
        };
        let (shape, rate) = theta_conditional(prior.alpha, prior.beta, d, q);
        let log_theta = sample_log_gamma(shape, rate, rng);
        if !log_theta.is_finite() {
            return Err(Error::runtime(format!("theta draw is not finite (shape {shape}, rate {rate})")));
        }
        self.state.log_theta = log_theta;
        Ok(())
    }

    /// Reflected random-walk Metropolis step for `lambda`.
    pub fn mh_lambda<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let lambda = self.state.lambda;
        let proposed = propose_lambda(lambda, self.config.half_width(), rng);
        let (points, exposure) = if self.config.prior_only {
            (0, 0.0)
        } else {
            (self.state.field_len(), self.grid.total_exposure())
        };
        let ok = accept(
            lambda_log_acceptance(lambda, proposed, &self.lambda_prior, points, exposure),
            rng,
        ) && proposed > 0.0;
        if ok {
            self.state.lambda = proposed;
        }
        self.stats.lambda.record(ok);
    }

    /// Log of the augmented posterior density at the current state, up to
    /// a constant.
    pub fn log_posterior(&mut self) -> Result<f64> {
        let prior = self.config.theta_prior;
        let log_theta = self.state.log_theta;
        let mut lp = prior.log_density_of_log(log_theta) - log_theta + lambda_log_prior(self.state.lambda, &self.lambda_prior);
        if !self.config.prior_only {
            let lambda = self.state.lambda;
            for (i, iv) in self.grid.intervals().iter().enumerate() {
                let points = self.state.latent[i].len() + self.layout.coal_of[i].is_some() as usize;
                lp += interval_term(iv.factor_f64(), iv.len(), points, lambda);
            }
            let sc = &mut self.scratch;
            self.state.flatten(&self.layout, &mut sc.times, &mut sc.values, &mut sc.kinds);
            lp += log_acceptance_terms(&sc.kinds, &sc.values);
            self.precision.rebuild(&sc.times, self.kind, self.state.theta())?;
            lp += self.precision.log_density(&sc.values);
        }
        Ok(lp)
    }

    fn snapshot(&mut self, iteration: usize) -> Result<Draw> {
        let log_posterior = self.log_posterior()?;
        if !log_posterior.is_finite() {
            return Err(Error::runtime(format!(
                "log posterior is {log_posterior} at iteration {iteration}"
            )));
        }
        let field = if self.config.prior_only {
            None
        } else {
            Some(self.state.field(&self.grid))
        };
        Ok(Draw {
            iteration,
            theta: self.state.theta(),
            log_theta: self.state.log_theta,
            lambda: self.state.lambda,
            latent_count: self.state.latent_count(),
            log_posterior,
            times: field.as_ref().map(|f| f.times().to_vec()).unwrap_or_default(),
            f: field.as_ref().map(|f| f.values().to_vec()).unwrap_or_default(),
        })
    }

    /// Run the configured iterations, keeping thinned post-burn-in draws.
    /// `progress` is called every `every` iterations.
    pub fn run<R, P>(&mut self, rng: &mut R, every: usize, mut progress: P) -> Result<Vec<Draw>>
    where
        R: Rng + ?Sized,
        P: FnMut(usize, &MoveStats),
    {
        let cfg = self.config.clone();
        let mut draws = Vec::with_capacity(cfg.retained());
        for it in 0..cfg.iterations {
            self.step(rng)?;
            if it >= cfg.burnin && (it + 1 - cfg.burnin).is_multiple_of(cfg.thin) {
                draws.push(self.snapshot(it + 1)?);
            }
            if every > 0 && (it + 1) % every == 0 {
                progress(it + 1, &self.stats);
            }
        }
        Ok(draws)
    }
}

/// Run one chain (stream 0) on `data`.
pub fn run_chain(data: &CoalescentData, config: &McmcConfig, kind: KernelKind) -> Result<ChainOutput> {
    run_chain_indexed(data, config, kind, 0)
}

/// Run chain number `chain`, whose random stream is derived from the seed
/// and the chain number.
pub fn run_chain_indexed(data: &CoalescentData, config: &McmcConfig, kind: KernelKind, chain: u64) -> Result<ChainOutput> {
    run_chain_on_grid(build_interval_grid(data), data, config, kind, chain)
}

/// As [`run_chain_indexed`] with an explicit interval grid.
pub fn run_chain_on_grid(
    grid: IntervalGrid,
    data: &CoalescentData,
    config: &McmcConfig,
    kind: KernelKind,
    chain: u64,
) -> Result<ChainOutput> {
    let mut sampler = Sampler::with_default_start(grid, kind, config.clone())?;
    let mut rng = stream(config.seed, Component::Chain, chain);
    let draws = sampler.run(&mut rng, 0, |_, _| {})?;
    Ok(ChainOutput {
        header: ChainHeader::new(config, kind, data, chain, sampler.stats().rates()),
        draws,
    })
}
