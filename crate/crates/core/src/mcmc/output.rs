use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::chain::AcceptanceRates;
use super::config::McmcConfig;
use crate::error::{Error, Result};
use crate::genealogy::CoalescentData;
use crate::gp::{KernelKind, LatentField};

pub const FORMAT: &str = "coalgp-chain";

/// Run metadata written as the first line of a chain file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainHeader {
    pub format: String,
    pub version: String,
    pub seed: u64,
    pub chain: u64,
    pub config: McmcConfig,
    pub kernel: KernelKind,
    pub data: CoalescentData,
    pub acceptance: AcceptanceRates,
    /// Free-form labels such as the time unit.
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub metadata: serde_json::Map<String, serde_json::Value>,
}

impl ChainHeader {
    pub fn new(config: &McmcConfig, kernel: KernelKind, data: &CoalescentData, chain: u64, acceptance: AcceptanceRates) -> Self {
        Self {
            format: FORMAT.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            chain,
            config: config.clone(),
            kernel,
            data: data.clone(),
            acceptance,
            metadata: serde_json::Map::new(),
        }
    }
}

/// One retained state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub iteration: usize,
    pub theta: f64,
    pub log_theta: f64,
    pub lambda: f64,
    pub latent_count: usize,
    pub log_posterior: f64,
    /// Field times: coalescent and thinned points, ascending.
    pub times: Vec<f64>,
    pub f: Vec<f64>,
}

impl Draw {
    /// The draw's field; point kinds are not stored and come back as latent.
    pub fn field(&self) -> Result<LatentField> {
        LatentField::new(
            self.times.clone(),
            self.f.clone(),
            vec![crate::gp::PointKind::Latent; self.times.len()],
        )
    }
}

/// Retained draws plus run metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainOutput {
    pub header: ChainHeader,
    pub draws: Vec<Draw>,
}

impl ChainOutput {
    /// Header line followed by one line per draw.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::runtime(format!("writing chain: {e}"));
        let ser = |e: serde_json::Error| Error::runtime(format!("serializing chain: {e}"));
        serde_json::to_writer(&mut out, &self.header).map_err(ser)?;
        out.write_all(b"\n").map_err(io)?;
        for d in &self.draws {
            serde_json::to_writer(&mut out, d).map_err(ser)?;
            out.write_all(b"\n").map_err(io)?;
        }
        out.flush().map_err(io)
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate().filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let bad = |i: usize, e: &dyn std::fmt::Display| Error::validation(format!("chain file line {}: {e}", i + 1));
        let (i, first) = lines.next().ok_or_else(|| Error::validation("chain file is empty"))?;
        let first = first.map_err(|e| bad(i, &e))?;
        let header: ChainHeader = serde_json::from_str(&first).map_err(|e| bad(i, &e))?;
        if header.format != FORMAT {
            return Err(Error::validation(format!("not a chain file (format {:?})", header.format)));
        }
        let mut draws = Vec::new();
        for (i, line) in lines {
            let line = line.map_err(|e| bad(i, &e))?;
            draws.push(serde_json::from_str(&line).map_err(|e| bad(i, &e))?);
        }
        Ok(Self { header, draws })
    }
}
