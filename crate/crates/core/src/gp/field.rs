use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    /// An observed coalescent event.
    Coalescent,
    /// A thinned (rejected) proposal.
    Latent,
}

/// Values of the latent function at a strictly increasing set of times.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LatentField {
    times: Vec<f64>,
    values: Vec<f64>,
    kinds: Vec<PointKind>,
}

impl LatentField {
    pub fn new(times: Vec<f64>, values: Vec<f64>, kinds: Vec<PointKind>) -> Result<Self> {
        if times.len() != values.len() || times.len() != kinds.len() {
            return Err(Error::validation("field times, values and kinds differ in length"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation("field times must be strictly increasing"));
        }
        if times.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::validation("field times and values must be finite"));
        }
        Ok(Self {
            times,
            values,
            kinds,
        })
    }

    /// Coalescent points only, with the given values.
    pub fn observed(times: &[f64], values: Vec<f64>) -> Result<Self> {
        Self::new(times.to_vec(), values, vec![PointKind::Coalescent; times.len()])
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn kinds(&self) -> &[PointKind] {
        &self.kinds
    }

    pub fn get(&self, i: usize) -> (f64, f64, PointKind) {
        (self.times[i], self.values[i], self.kinds[i])
    }

    pub fn latent_count(&self) -> usize {
        self.kinds.iter().filter(|&&k| k == PointKind::Latent).count()
    }

    pub fn latent_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.times
            .iter()
            .zip(&self.kinds)
            .filter(|(_, &k)| k == PointKind::Latent)
            .map(|(&t, _)| t)
    }

    /// `Ok(i)` if `t` is stored at `i`, else `Err(i)` with the insertion index.
    pub fn search(&self, t: f64) -> std::result::Result<usize, usize> {
        self.times.binary_search_by(|x| x.total_cmp(&t))
    }

    /// Indices of points strictly inside `(start, end)`.
    pub fn open_range(&self, start: f64, end: f64) -> Range<usize> {
        let lo = self.times.partition_point(|&x| x <= start);
        let hi = self.times.partition_point(|&x| x < end);
        lo..hi.max(lo)
    }

    /// Nearest stored points strictly before and after insertion index `idx`.
    #[inline]
    pub fn neighbors_at(&self, idx: usize) -> (Option<(f64, f64)>, Option<(f64, f64)>) {
        let left = idx.checked_sub(1).map(|i| (self.times[i], self.values[i]));
        let right = self.times.get(idx).map(|&t| (t, self.values[idx]));
        (left, right)
    }

    pub fn insert(&mut self, t: f64, f: f64, kind: PointKind) -> Result<usize> {
        match self.search(t) {
            Ok(_) => Err(Error::domain(format!("time {t} is already in the field"))),
            Err(i) => {
                self.insert_at(i, t, f, kind);
                Ok(i)
            }
        }
    }

    /// Insert at a known index; the caller keeps the times ordered.
    pub(crate) fn insert_at(&mut self, idx: usize, t: f64, f: f64, kind: PointKind) {
        debug_assert!(idx == 0 || self.times[idx - 1] < t);
        debug_assert!(idx == self.len() || t < self.times[idx]);
        self.times.insert(idx, t);
        self.values.insert(idx, f);
        self.kinds.insert(idx, kind);
    }

    pub fn remove(&mut self, idx: usize) -> (f64, f64, PointKind) {
        (
            self.times.remove(idx),
            self.values.remove(idx),
            self.kinds.remove(idx),
        )
    }
}
