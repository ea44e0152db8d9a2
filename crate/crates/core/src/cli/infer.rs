use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde_json::json;

use coalgp::genealogy::{build_interval_grid, CoalescentData};
use coalgp::likelihood::LambdaPrior;
use coalgp::mcmc::{ChainHeader, ChainOutput, GammaPrior, McmcConfig, MoveStats, Sampler};
use coalgp::rng::{stream, Component};

use super::args::InferArgs;
use super::{output_path, read_data_json, read_tree, to_json, usage, write_file, CliError, CliResult};

/// `chain.jsonl` -> `chain-3.jsonl`.
fn chain_path(base: &Path, chain: usize, chains: usize) -> PathBuf {
    if chains == 1 {
        return base.to_path_buf();
    }
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}-{chain}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{chain}"),
    };
    base.with_file_name(name)
}

fn dump_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".state-dump.json");
    out.with_file_name(name)
}

fn format_rates(stats: &MoveStats) -> String {
    let r = stats.rates();
    format!(
        "add {:.3} remove {:.3} move {:.3} lambda {:.3} slice evals {:.2}",
        r.rj_add, r.rj_remove, r.location, r.lambda, r.ess_evaluations
    )
}

fn config(args: &InferArgs) -> CliResult<McmcConfig> {
    let cfg = McmcConfig {
        iterations: args.iters,
        burnin: args.burnin,
        thin: args.thin,
        seed: args.seed,
        theta_prior: GammaPrior::new(args.alpha, args.beta)?,
        lambda_prior: LambdaPrior::new(args.lambda_hat, args.eps)?,
        lambda_half_width: args.half_width,
        rj_moves: args.rj_moves,
        location_moves: None,
        prior_only: args.prior_only,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn run_one(
    args: &InferArgs,
    data: &CoalescentData,
    cfg: &McmcConfig,
    chain: usize,
    metadata: &serde_json::Map<String, serde_json::Value>,
    stderr: &Mutex<()>,
) -> CliResult<PathBuf> {
    let kind = args.kernel.kind();
    let out = output_path(&chain_path(&args.out, chain, args.chains));
    let mut sampler = Sampler::with_default_start(build_interval_grid(data), kind, cfg.clone())?;
    let mut rng = stream(cfg.seed, Component::Chain, chain as u64);
    let every = args.progress.unwrap_or((cfg.iterations / 10).max(1));
    let total = cfg.iterations;
    let tag = if args.chains > 1 { format!("[chain {chain}] ") } else { String::new() };
    let result = sampler.run(&mut rng, every, |it, stats| {
        let _guard = stderr.lock();
        eprintln!("{tag}iteration {it}/{total}  {}", format_rates(stats));
    });
    let draws = match result {
        Ok(draws) => draws,
        Err(e) if !e.is_input_error() => {
            let dump = dump_path(&out);
            let state = json!({
                "error": e.to_string(),
                "chain": chain,
                "config": cfg,
                "state": sampler.state(),
            });
            write_file(&dump, &to_json(&state)?)?;
            return Err(CliError::Runtime(format!("{e}; sampler state written to {}", dump.display())));
        }
        Err(e) => return Err(e.into()),
    };
    let mut header = ChainHeader::new(cfg, kind, data, chain as u64, sampler.stats().rates());
    header.metadata = metadata.clone();
    let output = ChainOutput { header, draws };
    let mut buf = Vec::new();
    output.write_jsonl(&mut buf)?;
    write_file(&out, std::str::from_utf8(&buf).expect("JSON is UTF-8"))?;
    let _guard = stderr.lock();
    eprintln!("{tag}{} draws; {}; wrote {}", output.draws.len(), format_rates(sampler.stats()), out.display());
    Ok(out)
}

pub fn run(args: InferArgs) -> CliResult<()> {
    if args.chains == 0 {
        return Err(usage("--chains must be at least 1"));
    }
    let (data, input) = match (&args.tree, &args.data) {
        (Some(tree), _) => (read_tree(tree, &args.tree_args)?, tree),
        (None, Some(path)) => (read_data_json(path)?, path),
        (None, None) => return Err(usage("one of --tree or --data is required")),
    };
    let cfg = config(&args)?;
    args.kernel.kind().validate()?;
    if cfg.retained() == 0 {
        eprintln!("warning: no draws will be retained with these --iters/--burnin/--thin settings");
    }

    let mut metadata = serde_json::Map::new();
    metadata.insert("input".into(), json!(input.display().to_string()));
    metadata.insert("chains".into(), json!(args.chains));
    if let Some(unit) = &args.unit {
        metadata.insert("unit".into(), json!(unit));
    }
    eprintln!(
        "{} tips, {} sampling times, root at {}",
        data.num_tips(),
        data.samp_times().len(),
        data.tmrca()
    );

    let stderr = Mutex::new(());
    let results: Vec<CliResult<PathBuf>> = (0..args.chains)
        .into_par_iter()
        .map(|c| run_one(&args, &data, &cfg, c, &metadata, &stderr))
        .collect();
    results.into_iter().collect::<CliResult<Vec<_>>>()?;
    Ok(())
}
