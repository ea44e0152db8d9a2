use std::fs::File;
use std::io::BufReader;

use coalgp::mcmc::ChainOutput;
use coalgp::summary::{regular_grid, summarize_chains, MetricReport};
use coalgp::trajectory::{Builtin, Trajectory};

use super::args::SummarizeArgs;
use super::{output_path, to_json, usage, write_file, CliResult};

pub fn run(args: SummarizeArgs) -> CliResult<()> {
    let truth = args.truth.as_deref().map(str::parse::<Builtin>).transpose()?;
    let mut chains = Vec::with_capacity(args.chain.len());
    for path in &args.chain {
        let file = File::open(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        let chain = ChainOutput::read_jsonl(BufReader::new(file))
            .map_err(|e| usage(format!("{}: {e}", path.display())))?;
        chains.push(chain);
    }
    let first = &chains[0];
    let tmrca = first.header.data.tmrca();
    let end = args.end.unwrap_or(tmrca);
    let grid = regular_grid(end, args.grid)?;
    let seed = args.seed.unwrap_or(first.header.seed);
    let summary = summarize_chains(&chains, &grid, seed)?;

    let extrapolated = summary.extrapolated.iter().filter(|&&x| x).count();
    if extrapolated > 0 {
        eprintln!(
            "warning: {extrapolated} of {} grid points lie beyond the root time {tmrca}; \
             those rows are prior extrapolation and are flagged in the output",
            grid.len()
        );
    }
    let out = output_path(&args.out);
    write_file(&out, &summary.to_csv())?;
    eprintln!("{} draws summarized on {} grid points; wrote {}", summary.draws, grid.len(), out.display());

    if let Some(truth) = truth {
        let values: Vec<f64> = grid.iter().map(|&t| truth.ne_at(t)).collect();
        let report = MetricReport::compute(&summary, &values)?;
        let metrics_out = output_path(&args.metrics_out);
        write_file(&metrics_out, &to_json(&report)?)?;
        eprintln!(
            "SRE {:.4}, MRW {:.4}, envelope {:.4}, variation {:.4}; wrote {}",
            report.sre,
            report.mrw,
            report.envelope,
            report.variation,
            metrics_out.display()
        );
    }
    Ok(())
}
