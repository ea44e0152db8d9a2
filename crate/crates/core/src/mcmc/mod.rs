//! Data-augmentation MCMC for the sigmoidal-GP coalescent posterior.

mod chain;
mod config;
mod output;
mod state;
mod updates;

pub use chain::{run_chain, run_chain_indexed, run_chain_on_grid, AcceptanceRates, Counter, MoveStats, Sampler};
pub use config::{GammaPrior, McmcConfig};
pub use output::{ChainHeader, ChainOutput, Draw, FORMAT};
pub use state::ChainState;
pub use updates::{
    accept, ess_step, lambda_log_acceptance, location_log_acceptance, propose_lambda, rj_log_acceptance_down,
    rj_log_acceptance_up, sample_log_gamma, theta_conditional,
};
