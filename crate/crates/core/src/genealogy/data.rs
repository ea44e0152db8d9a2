use serde::{Deserialize, Serialize};

use super::grid::sweep;
use super::newick::Genealogy;
use crate::error::{Error, Result};

/// Sufficient statistics of a genealogy for population-size inference.
///
/// All vectors are in increasing time order: `coal_times[0] == 0` is the
/// present (`t_n`), `coal_times[n-1]` is the root (`t_1`). Sampling times
/// start at 0 and `samp_counts[j]` lineages join at `samp_times[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawData")]
pub struct CoalescentData {
    coal_times: Vec<f64>,
    samp_times: Vec<f64>,
    samp_counts: Vec<usize>,
}

#[derive(Deserialize)]
struct RawData {
    coal_times: Vec<f64>,
    #[serde(default)]
    samp_times: Option<Vec<f64>>,
    #[serde(default)]
    samp_counts: Option<Vec<usize>>,
}

impl TryFrom<RawData> for CoalescentData {
    type Error = Error;

    fn try_from(raw: RawData) -> Result<Self> {
        match (raw.samp_times, raw.samp_counts) {
            (Some(s), Some(c)) => CoalescentData::new(raw.coal_times, s, c),
            (None, None) => CoalescentData::isochronous(raw.coal_times),
            _ => Err(Error::validation(
                "samp_times and samp_counts must be given together",
            )),
        }
    }
}

fn strictly_increasing_from_zero(v: &[f64], what: &str) -> Result<()> {
    if v.first() != Some(&0.0) {
        return Err(Error::validation(format!("{what} must start at 0")));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::validation(format!("{what} must be finite")));
    }
    if v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation(format!(
            "{what} must be strictly increasing (tied times are not supported)"
        )));
    }
    Ok(())
}

impl CoalescentData {
    pub fn new(coal_times: Vec<f64>, samp_times: Vec<f64>, samp_counts: Vec<usize>) -> Result<Self> {
        if coal_times.len() < 2 {
            return Err(Error::validation("need at least two tips"));
        }
        strictly_increasing_from_zero(&coal_times, "coalescent times")?;
        strictly_increasing_from_zero(&samp_times, "sampling times")?;
        if samp_times.len() != samp_counts.len() {
            return Err(Error::validation(
                "samp_times and samp_counts must have equal length",
            ));
        }
        if samp_counts.contains(&0) {
            return Err(Error::validation("sample counts must be positive"));
        }
        let total: usize = samp_counts.iter().sum();
        if total != coal_times.len() {
            return Err(Error::validation(format!(
                "sample counts sum to {total} but there are {} coalescent times",
                coal_times.len()
            )));
        }
        sweep(&coal_times, &samp_times, &samp_counts)?;
        Ok(Self {
            coal_times,
            samp_times,
            samp_counts,
        })
    }

    /// All `n = coal_times.len()` samples taken at time 0.
    pub fn isochronous(coal_times: Vec<f64>) -> Result<Self> {
        let n = coal_times.len();
        Self::new(coal_times, vec![0.0], vec![n])
    }

    /// Reduce a genealogy to its coalescent and sampling times.
    pub fn from_genealogy(g: &Genealogy) -> Result<Self> {
        let mut coal: Vec<f64> = g.internal_nodes().map(|n| n.height).collect();
        coal.sort_by(f64::total_cmp);
        if let Some(w) = coal.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::validation(format!(
                "two internal nodes share height {}; tied coalescent times are not supported",
                w[0]
            )));
        }
        let mut tips: Vec<f64> = g.tips().map(|n| n.height).collect();
        tips.sort_by(f64::total_cmp);
        let mut samp_times: Vec<f64> = Vec::new();
        let mut samp_counts: Vec<usize> = Vec::new();
        for h in tips {
            if samp_times.last() == Some(&h) {
                *samp_counts.last_mut().unwrap() += 1;
            } else {
                samp_times.push(h);
                samp_counts.push(1);
            }
        }
        coal.insert(0, 0.0);
        Self::new(coal, samp_times, samp_counts)
    }

    pub fn coal_times(&self) -> &[f64] {
        &self.coal_times
    }

    /// Times of the `n - 1` coalescent events, i.e. `coal_times` without `t_n = 0`.
    pub fn coalescent_events(&self) -> &[f64] {
        &self.coal_times[1..]
    }

    pub fn samp_times(&self) -> &[f64] {
        &self.samp_times
    }

    pub fn samp_counts(&self) -> &[usize] {
        &self.samp_counts
    }

    pub fn num_tips(&self) -> usize {
        self.coal_times.len()
    }

    pub fn is_isochronous(&self) -> bool {
        self.samp_times.len() == 1
    }

    pub fn tmrca(&self) -> f64 {
        *self.coal_times.last().unwrap()
    }
}
