use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use coalgp::gp::KernelKind;

#[derive(Debug, Parser)]
#[command(name = "coalgp", version, about = "Nonparametric effective population size inference from genealogies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate coalescent times by thinning.
    Simulate(SimulateArgs),
    /// Run the MCMC sampler on a genealogy.
    Infer(InferArgs),
    /// Summarize chains on a time grid.
    Summarize(SummarizeArgs),
    /// Convert a Newick tree to coalescent data JSON.
    Extract(ExtractArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelName {
    /// Brownian motion.
    Bm,
    /// Ornstein-Uhlenbeck.
    Ou,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    /// Gaussian process family.
    #[arg(long, value_enum, default_value = "bm")]
    pub kernel: KernelName,
    /// Mean-reversion rate of the OU kernel.
    #[arg(long, default_value_t = KernelKind::DEFAULT_OU_RATE)]
    pub phi: f64,
    /// Variance of the free initial level of the BM kernel, at unit precision.
    #[arg(long, default_value_t = KernelKind::DEFAULT_INITIAL_VARIANCE)]
    pub initial_variance: f64,
}

impl KernelArgs {
    pub fn kind(&self) -> KernelKind {
        match self.kernel {
            KernelName::Bm => KernelKind::BrownianMotion {
                initial_variance: self.initial_variance,
            },
            KernelName::Ou => KernelKind::OrnsteinUhlenbeck { rate: self.phi },
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TreeArgs {
    /// Tip-date table: tab-separated `label<TAB>date` lines.
    #[arg(long, value_name = "TSV", conflicts_with = "date_delim")]
    pub dates: Option<PathBuf>,
    /// Read tip dates from a `label<DELIM>date` suffix in each tip label.
    #[arg(long, value_name = "CHAR")]
    pub date_delim: Option<char>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("sampling").required(true).args(["iso", "schedule"])))]
pub struct SimulateArgs {
    /// All samples taken at time 0.
    #[arg(long, requires = "n")]
    pub iso: bool,
    /// Number of samples for `--iso`.
    #[arg(short = 'n', value_name = "N")]
    pub n: Option<usize>,
    /// Sampling schedule: tab-separated `time<TAB>count` lines.
    #[arg(long, value_name = "TSV")]
    pub schedule: Option<PathBuf>,
    /// `constant:c`, `expgrowth:n0,rate`, `boombust`, or `gp` for a random
    /// trajectory from the Gaussian process prior.
    #[arg(long, default_value = "constant:1")]
    pub traj: String,
    /// Thinning rate bound. Required for `gp`; for a deterministic trajectory
    /// it must satisfy `1/(N_e(t) * lambda) <= 1`, and when omitted a
    /// piecewise bound is used instead.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Precision of the GP prior for `--traj gp`.
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Block width of the piecewise thinning bound.
    #[arg(long, default_value_t = coalgp::simulate::DEFAULT_BLOCK_WIDTH)]
    pub block_width: f64,
    /// Maximum proposals per coalescent interval.
    #[arg(long, default_value_t = coalgp::simulate::DEFAULT_PROPOSAL_CAP)]
    pub proposal_cap: u64,
    /// Number of independent replicates.
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    /// Replicates of the time-transformation oracle for the KS report
    /// (default: 10 per simulated replicate).
    #[arg(long)]
    pub oracle_replicates: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output file: JSON for one replicate, JSON lines for several.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    /// KS report written alongside replicated runs.
    #[arg(long, default_value = "ks_report.json")]
    pub ks_out: PathBuf,
    /// Time unit recorded in the output metadata.
    #[arg(long)]
    pub unit: Option<String>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["tree", "data"])))]
pub struct InferArgs {
    /// Newick genealogy.
    #[arg(long)]
    pub tree: Option<PathBuf>,
    /// Coalescent data JSON (as written by `extract` or `simulate`).
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub tree_args: TreeArgs,
    #[arg(long, default_value_t = 10_000)]
    pub iters: usize,
    #[arg(long, default_value_t = 2_000)]
    pub burnin: usize,
    #[arg(long, default_value_t = 10)]
    pub thin: usize,
    /// Scale of the thinning-rate prior.
    #[arg(long, default_value_t = 10.0)]
    pub lambda_hat: f64,
    /// Prior mass of the thinning rate below `lambda_hat`.
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// Shape of the Gamma prior on the GP precision.
    #[arg(long, default_value_t = 0.001)]
    pub alpha: f64,
    /// Rate of the Gamma prior on the GP precision.
    #[arg(long, default_value_t = 0.001)]
    pub beta: f64,
    /// Half-width of the thinning-rate proposal (default: 10% of `lambda_hat`).
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Add/remove proposals per interval per iteration.
    #[arg(long, default_value_t = 1)]
    pub rj_moves: usize,
    /// Sample from the prior only, ignoring the genealogy.
    #[arg(long)]
    pub prior_only: bool,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Independent chains, run in parallel; chain `i` goes to `<out>-<i>`.
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    #[arg(long, short = 'o', default_value = "chain.jsonl")]
    pub out: PathBuf,
    /// Report progress every this many iterations (0 disables; default: a tenth of the run).
    #[arg(long)]
    pub progress: Option<usize>,
    /// Time unit recorded in the output metadata.
    #[arg(long)]
    pub unit: Option<String>,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    /// Chain file; repeat to pool several chains.
    #[arg(long, required = true)]
    pub chain: Vec<PathBuf>,
    /// Number of grid points.
    #[arg(long, default_value_t = coalgp::summary::DEFAULT_GRID_SIZE)]
    pub grid: usize,
    /// Grid end (default: root time of the genealogy).
    #[arg(long)]
    pub end: Option<f64>,
    /// Seed for predictive draws (default: the chain's seed).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, short = 'o', default_value = "summary.csv")]
    pub out: PathBuf,
    /// True trajectory (`constant:c`, `expgrowth:n0,rate`, `boombust`) for accuracy metrics.
    #[arg(long)]
    pub truth: Option<String>,
    #[arg(long, default_value = "metrics.json")]
    pub metrics_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Newick genealogy.
    #[arg(long)]
    pub tree: PathBuf,
    #[command(flatten)]
    pub tree_args: TreeArgs,
    #[arg(long, short = 'o', default_value = "data.json")]
    pub out: PathBuf,
}
