use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genealogy::{IntervalEnd, IntervalGrid};
use crate::gp::{LatentField, PointKind};

/// Where each grid interval's closing coalescent value lives, if any.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Layout {
    pub(crate) coal_of: Vec<Option<usize>>,
    pub(crate) coal_times: Vec<f64>,
}

impl Layout {
    pub(crate) fn new(grid: &IntervalGrid) -> Self {
        let mut coal_of = Vec::with_capacity(grid.len());
        let mut coal_times = Vec::new();
        for iv in grid.intervals() {
            if iv.ends_with == IntervalEnd::Coalescence {
                coal_of.push(Some(coal_times.len()));
                coal_times.push(iv.end);
            } else {
                coal_of.push(None);
            }
        }
        Self { coal_of, coal_times }
    }
}

/// One state of the sampler: thinned points grouped by interval, `f` at
/// every coalescent and thinned point, and the hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    /// `latent[i]`: `(time, f)` pairs strictly inside grid interval `i`, ascending.
    pub(crate) latent: Vec<Vec<(f64, f64)>>,
    /// `f` at the coalescent events, ascending in time.
    pub(crate) coal_f: Vec<f64>,
    pub(crate) log_theta: f64,
    pub(crate) lambda: f64,
}

impl ChainState {
    /// No thinned points and `f = 0` at every coalescent event.
    pub fn initial(grid: &IntervalGrid, theta: f64, lambda: f64) -> Result<Self> {
        let layout = Layout::new(grid);
        Self::check_hyper(theta.ln(), lambda)?;
        Ok(Self {
            latent: vec![Vec::new(); grid.len()],
            coal_f: vec![0.0; layout.coal_times.len()],
            log_theta: theta.ln(),
            lambda,
        })
    }

    /// A state holding the given field, which must cover every coalescent
    /// event and may hold thinned points only where the grid allows them.
    pub fn from_field(grid: &IntervalGrid, field: &LatentField, log_theta: f64, lambda: f64) -> Result<Self> {
        Self::check_hyper(log_theta, lambda)?;
        let layout = Layout::new(grid);
        let mut latent = vec![Vec::new(); grid.len()];
        let mut coal_f = vec![f64::NAN; layout.coal_times.len()];
        for i in 0..field.len() {
            let (t, f, kind) = field.get(i);
            let slot = grid
                .locate(t)
                .ok_or_else(|| Error::validation(format!("field point {t} lies outside the genealogy")))?;
            let iv = &grid.intervals()[slot];
            match kind {
                PointKind::Coalescent => match layout.coal_of[slot] {
                    Some(j) if iv.end == t => coal_f[j] = f,
                    _ => return Err(Error::validation(format!("{t} is not a coalescent time"))),
                },
                PointKind::Latent => {
                    if t >= iv.end {
                        return Err(Error::validation(format!("thinned point {t} sits on an interval end")));
                    }
                    latent[slot].push((t, f));
                }
            }
        }
        if coal_f.iter().any(|f| f.is_nan()) {
            return Err(Error::validation("field lacks a value at some coalescent time"));
        }
        Ok(Self {
            latent,
            coal_f,
            log_theta,
            lambda,
        })
    }

    fn check_hyper(log_theta: f64, lambda: f64) -> Result<()> {
        if !log_theta.is_finite() || !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::validation("theta and lambda must be positive and finite"));
        }
        Ok(())
    }

    pub fn theta(&self) -> f64 {
        self.log_theta.exp()
    }

    pub fn log_theta(&self) -> f64 {
        self.log_theta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn latent_count(&self) -> usize {
        self.latent.iter().map(Vec::len).sum()
    }

    /// Thinned points per grid interval.
    pub fn latent_counts(&self) -> Vec<usize> {
        self.latent.iter().map(Vec::len).collect()
    }

    pub fn field_len(&self) -> usize {
        self.coal_f.len() + self.latent_count()
    }

    pub fn coalescent_values(&self) -> &[f64] {
        &self.coal_f
    }

    /// The state's field as ordered arrays.
    pub fn field(&self, grid: &IntervalGrid) -> LatentField {
        let layout = Layout::new(grid);
        let mut times = Vec::with_capacity(self.field_len());
        let mut values = Vec::with_capacity(self.field_len());
        let mut kinds = Vec::with_capacity(self.field_len());
        self.flatten(&layout, &mut times, &mut values, &mut kinds);
        LatentField::new(times, values, kinds).expect("chain states keep their points ordered")
    }

    pub(crate) fn flatten(&self, layout: &Layout, times: &mut Vec<f64>, values: &mut Vec<f64>, kinds: &mut Vec<PointKind>) {
        times.clear();
        values.clear();
        kinds.clear();
        for (i, group) in self.latent.iter().enumerate() {
            for &(t, f) in group {
                times.push(t);
                values.push(f);
                kinds.push(PointKind::Latent);
            }
            if let Some(j) = layout.coal_of[i] {
                times.push(layout.coal_times[j]);
                values.push(self.coal_f[j]);
                kinds.push(PointKind::Coalescent);
            }
        }
    }

    /// Write flattened values back, in the order of [`Self::flatten`].
    pub(crate) fn scatter(&mut self, layout: &Layout, values: &[f64]) {
        let mut it = values.iter();
        for (i, group) in self.latent.iter_mut().enumerate() {
            for p in group.iter_mut() {
                p.1 = *it.next().expect("value count matches the field");
            }
            if let Some(j) = layout.coal_of[i] {
                self.coal_f[j] = *it.next().expect("value count matches the field");
            }
        }
    }

    /// Nearest stored points on either side of `t` inside interval `i`.
    pub(crate) fn neighbors(&self, layout: &Layout, i: usize, t: f64) -> (Option<(f64, f64)>, Option<(f64, f64)>) {
        let group = &self.latent[i];
        let pos = group.partition_point(|p| p.0 < t);
        let left = if pos > 0 {
            Some(group[pos - 1])
        } else {
            (0..i).rev().find_map(|j| self.last_point(layout, j))
        };
        let right = if pos < group.len() {
            Some(group[pos])
        } else if let Some(c) = layout.coal_of[i] {
            Some((layout.coal_times[c], self.coal_f[c]))
        } else {
            (i + 1..self.latent.len()).find_map(|j| self.first_point(layout, j))
        };
        (left, right)
    }

    fn last_point(&self, layout: &Layout, i: usize) -> Option<(f64, f64)> {
        match layout.coal_of[i] {
            Some(c) => Some((layout.coal_times[c], self.coal_f[c])),
            None => self.latent[i].last().copied(),
        }
    }

    fn first_point(&self, layout: &Layout, i: usize) -> Option<(f64, f64)> {
        self.latent[i].first().copied().or_else(|| {
            layout.coal_of[i].map(|c| (layout.coal_times[c], self.coal_f[c]))
        })
    }
}
