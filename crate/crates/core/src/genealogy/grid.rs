//! The interval structure of a genealogy: the partition of `(0, t_1]` into
//! pieces of constant lineage count, grouped by the coalescent event that
//! closes each inter-coalescent span.

use serde::{Deserialize, Serialize};

use super::data::CoalescentData;
use crate::error::{Error, Result};

/// `k choose 2`, the number of lineage pairs that can merge.
pub fn coalescent_factor(k: u64) -> Result<u64> {
    if k < 1 {
        return Err(Error::domain("coalescent factor needs at least one lineage"));
    }
    Ok(k * (k - 1) / 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalEnd {
    Coalescence,
    Sampling,
}

/// One piece `(start, end]` of constant lineage count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
    pub lineages: u64,
    /// `lineages choose 2`.
    pub factor: u64,
    /// Index `k` of the inter-coalescent span `(t_k, t_{k-1}]` holding this piece.
    pub k: usize,
    pub ends_with: IntervalEnd,
}

impl Interval {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start < t && t <= self.end
    }

    pub fn factor_f64(&self) -> f64 {
        self.factor as f64
    }
}

/// Ordered intervals covering `(0, t_1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalGrid {
    intervals: Vec<Interval>,
    /// Sum of `factor * len` over all intervals.
    total_exposure: f64,
}

impl IntervalGrid {
    fn from_intervals(intervals: Vec<Interval>) -> Self {
        let total_exposure = intervals.iter().map(|iv| iv.factor_f64() * iv.len()).sum();
        Self {
            intervals,
            total_exposure,
        }
    }

    /// Closed form for samples that all share time 0: one interval
    /// `(t_k, t_{k-1}]` with `k` lineages per span.
    pub fn isochronous(coal_times: &[f64]) -> Result<Self> {
        let n = coal_times.len();
        if n < 2 {
            return Err(Error::validation("need at least two coalescent times"));
        }
        let mut intervals = Vec::with_capacity(n - 1);
        for j in 1..n {
            let k = n - j + 1;
            let (start, end) = (coal_times[j - 1], coal_times[j]);
            if end <= start {
                return Err(Error::validation("coalescent times must strictly increase"));
            }
            intervals.push(Interval {
                start,
                end,
                lineages: k as u64,
                factor: coalescent_factor(k as u64)?,
                k,
                ends_with: IntervalEnd::Coalescence,
            });
        }
        Ok(Self::from_intervals(intervals))
    }

    /// Build the grid for general (possibly serially sampled) data.
    pub fn build(data: &CoalescentData) -> Self {
        Self::from_intervals(
            sweep(data.coal_times(), data.samp_times(), data.samp_counts())
                .expect("CoalescentData is validated on construction"),
        )
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn total_exposure(&self) -> f64 {
        self.total_exposure
    }

    /// Right end of the last interval (the root height).
    pub fn tmrca(&self) -> f64 {
        self.intervals.last().map_or(0.0, |iv| iv.end)
    }

    /// Index of the interval containing `t`, using right-closed intervals.
    pub fn locate(&self, t: f64) -> Option<usize> {
        let i = self.intervals.partition_point(|iv| iv.end < t);
        self.intervals.get(i).filter(|iv| iv.contains(t)).map(|_| i)
    }

    /// Intervals that belong to span `k`, in time order.
    pub fn span(&self, k: usize) -> impl Iterator<Item = &Interval> {
        self.intervals.iter().filter(move |iv| iv.k == k)
    }
}

/// Walk forward through backward time, opening a new interval at every
/// sampling time and closing one at every coalescence. A coalescence that
/// coincides with a sampling time closes its interval before the new
/// samples join.
pub(crate) fn sweep(coal: &[f64], samp: &[f64], counts: &[usize]) -> Result<Vec<Interval>> {
    let n = coal.len();
    let mut lineages = counts[0] as u64;
    let mut next = 1;
    let mut start = 0.0;
    let mut intervals = Vec::with_capacity(n - 1 + samp.len());
    for j in 1..n {
        let tc = coal[j];
        let k = n - j + 1;
        while next < samp.len() && samp[next] < tc {
            let s = samp[next];
            if s > start {
                intervals.push(Interval {
                    start,
                    end: s,
                    lineages,
                    factor: coalescent_factor(lineages)?,
                    k,
                    ends_with: IntervalEnd::Sampling,
                });
                start = s;
            }
            lineages += counts[next] as u64;
            next += 1;
        }
        if lineages < 2 {
            return Err(Error::validation(format!(
                "coalescence at time {tc} with only {lineages} active lineage(s)"
            )));
        }
        intervals.push(Interval {
            start,
            end: tc,
            lineages,
            factor: coalescent_factor(lineages)?,
            k,
            ends_with: IntervalEnd::Coalescence,
        });
        start = tc;
        lineages -= 1;
    }
    if next < samp.len() {
        return Err(Error::validation(
            "sampling times at or beyond the root; the root must be older than every sample",
        ));
    }
    if lineages != 1 {
        return Err(Error::validation(format!(
            "{lineages} lineages remain after the last coalescence"
        )));
    }
    Ok(intervals)
}
