use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use coalgp::gp::{ForwardSampler, GpKernel};
use coalgp::rng::{stream, Component};
use coalgp::simulate::{
    simulate_hetero_thinning, simulate_hetero_thinning_field, simulate_iso_thinning, simulate_iso_thinning_field,
    simulate_time_transform, Deterministic, Schedule, SimulationRecord,
};
use coalgp::stats::ks_two_sample;
use coalgp::trajectory::Builtin;

use super::args::SimulateArgs;
use super::{output_path, read_input, to_json, usage, write_file, CliError, CliResult};

enum Model {
    Fixed(Builtin),
    Gp(GpKernel),
}

#[derive(Serialize)]
struct Output<'a> {
    #[serde(flatten)]
    record: &'a SimulationRecord,
    metadata: &'a Value,
}

#[derive(Serialize)]
struct KsRow {
    /// Index into `coal_times`.
    event: usize,
    distance: f64,
}

#[derive(Serialize)]
struct KsReport {
    trajectory: String,
    replicates: usize,
    oracle_replicates: usize,
    seed: u64,
    max_distance: f64,
    ks: Vec<KsRow>,
}

fn read_schedule(path: &Path) -> CliResult<Schedule> {
    let text = read_input(path)?;
    let mut times = Vec::new();
    let mut counts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || usage(format!("{} line {}: expected `time<TAB>count`", path.display(), i + 1));
        let mut cols = line.split('\t').map(str::trim);
        let t: f64 = cols.next().and_then(|c| c.parse().ok()).ok_or_else(bad)?;
        let c: usize = cols.next().and_then(|c| c.parse().ok()).ok_or_else(bad)?;
        times.push(t);
        counts.push(c);
    }
    Ok(Schedule::new(times, counts)?)
}

fn simulate_one(
    args: &SimulateArgs,
    model: &Model,
    schedule: &Schedule,
    replicate: usize,
) -> coalgp::Result<SimulationRecord> {
    let mut rng = stream(args.seed, Component::Simulation, replicate as u64);
    let iso = args.iso;
    match model {
        Model::Fixed(traj) => {
            let spec = match args.lambda {
                Some(l) => Deterministic::new(traj, l)?,
                None => Deterministic::adaptive(traj, args.block_width)?,
            }
            .with_proposal_cap(args.proposal_cap);
            if iso {
                simulate_iso_thinning(schedule.num_samples(), &spec, &mut rng)
            } else {
                simulate_hetero_thinning(schedule, &spec, &mut rng)
            }
        }
        Model::Gp(kernel) => {
            let lambda = args.lambda.expect("checked");
            let mut field = ForwardSampler::new(*kernel);
            if iso {
                simulate_iso_thinning_field(schedule.num_samples(), &mut field, lambda, args.proposal_cap, &mut rng)
            } else {
                simulate_hetero_thinning_field(schedule, &mut field, lambda, args.proposal_cap, &mut rng)
            }
        }
    }
}

fn ks_report(args: &SimulateArgs, traj: &Builtin, schedule: &Schedule, records: &[SimulationRecord]) -> CliResult<KsReport> {
    let oracle_reps = args.oracle_replicates.unwrap_or(10 * records.len());
    let oracle: Vec<Vec<f64>> = (0..oracle_reps)
        .into_par_iter()
        .map(|r| simulate_time_transform(schedule, traj, &mut stream(args.seed, Component::Oracle, r as u64)))
        .collect::<coalgp::Result<_>>()?;
    let events = records[0].coal_times.len();
    let mut ks = Vec::with_capacity(events);
    for k in 1..events {
        let mut a: Vec<f64> = records.iter().map(|r| r.coal_times[k]).collect();
        let mut b: Vec<f64> = oracle.iter().map(|o| o[k]).collect();
        ks.push(KsRow {
            event: k,
            distance: ks_two_sample(&mut a, &mut b),
        });
    }
    Ok(KsReport {
        trajectory: traj.to_string(),
        replicates: records.len(),
        oracle_replicates: oracle_reps,
        seed: args.seed,
        max_distance: ks.iter().map(|r| r.distance).fold(0.0, f64::max),
        ks,
    })
}

pub fn run(args: SimulateArgs) -> CliResult<()> {
    let schedule = match (&args.schedule, args.n) {
        (Some(path), _) => read_schedule(path)?,
        (None, Some(n)) => Schedule::isochronous(n)?,
        (None, None) => return Err(usage("--iso needs -n")),
    };
    if args.replicates == 0 {
        return Err(usage("--replicates must be at least 1"));
    }
    let model = if args.traj.trim().eq_ignore_ascii_case("gp") {
        if args.lambda.is_none() {
            return Err(usage("--traj gp needs --lambda"));
        }
        Model::Gp(GpKernel::new(args.kernel.kind(), args.theta)?)
    } else {
        Model::Fixed(args.traj.parse::<Builtin>()?)
    };

    let traj_label = match &model {
        Model::Fixed(t) => t.to_string(),
        Model::Gp(_) => "gp".to_string(),
    };
    let mut metadata = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "seed": args.seed,
        "trajectory": traj_label,
        "lambda": args.lambda,
        "samp_times": schedule.times(),
        "samp_counts": schedule.counts(),
    });
    if let Model::Gp(kernel) = &model {
        metadata["kernel"] = serde_json::to_value(kernel.kind).expect("serializable");
        metadata["theta"] = json!(kernel.theta);
    } else if args.lambda.is_none() {
        metadata["block_width"] = json!(args.block_width);
    }
    if let Some(unit) = &args.unit {
        metadata["unit"] = json!(unit);
    }

    let records: Vec<SimulationRecord> = (0..args.replicates)
        .into_par_iter()
        .map(|r| simulate_one(&args, &model, &schedule, r))
        .collect::<coalgp::Result<_>>()?;

    if args.replicates == 1 {
        let out = output_path(args.out.as_deref().unwrap_or(Path::new("simulation.json")));
        write_file(&out, &to_json(&Output { record: &records[0], metadata: &metadata })?)?;
        eprintln!(
            "{} coalescent times, {} thinned points; wrote {}",
            records[0].coal_times.len() - 1,
            records[0].latent_count(),
            out.display()
        );
        return Ok(());
    }

    let out = output_path(args.out.as_deref().unwrap_or(Path::new("simulations.jsonl")));
    let mut text = String::new();
    for (r, record) in records.iter().enumerate() {
        metadata["replicate"] = json!(r);
        let line = serde_json::to_string(&Output { record, metadata: &metadata })
            .map_err(|e| CliError::Runtime(format!("serializing output: {e}")))?;
        text.push_str(&line);
        text.push('\n');
    }
    write_file(&out, &text)?;
    eprintln!("{} replicates; wrote {}", records.len(), out.display());

    match &model {
        Model::Fixed(traj) => {
            let report = ks_report(&args, traj, &schedule, &records)?;
            let ks_out = output_path(&args.ks_out);
            write_file(&ks_out, &to_json(&report)?)?;
            eprintln!(
                "max KS distance to the time-transformation oracle: {:.4}; wrote {}",
                report.max_distance,
                ks_out.display()
            );
        }
        Model::Gp(_) => eprintln!("no oracle for GP trajectories; KS report skipped"),
    }
    Ok(())
}
