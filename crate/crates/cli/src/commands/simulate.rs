use std::path::PathBuf;

use clap::Parser;
use greedybins_core::rankstats::load_histogram;
use greedybins_core::{AllocationState, PolicyKind, RunSpec, TieWeight};
use serde_json::json;

use crate::output::{Csv, Sink};
use crate::CliError;

#[derive(Debug, Parser)]
pub struct Args {
    #[arg(long)]
    policy: PolicyKind,
    /// Balls to place.
    #[arg(long)]
    m: u64,
    /// Bins.
    #[arg(long)]
    n: usize,
    /// Choices per ball (ignored by uniform).
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extra histogram times, comma separated; needs --out-dir.
    #[arg(long, value_delimiter = ',')]
    snapshots: Vec<u64>,
    /// Directory for histogram CSVs and the manifest; stdout otherwise.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Write the per-step trace CSV to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// per-bin or per-slot tie weighting.
    #[arg(long, default_value = "per-bin")]
    tie_weight: TieWeight,
}

fn histogram_csv(state: &AllocationState) -> String {
    let mut csv = Csv::new(&["load", "count"]);
    for (load, count) in load_histogram(state) {
        csv.row(&[load.to_string(), count.to_string()]);
    }
    csv.into_string()
}

pub fn run(args: Args) -> Result<(), CliError> {
    if args.policy == PolicyKind::Uniform && args.d.is_some() {
        eprintln!("warning: --d is ignored for the uniform policy");
    }
    if !args.snapshots.is_empty() && args.out_dir.is_none() {
        return Err(CliError::Usage("--snapshots needs --out-dir".into()));
    }
    if let Some(&t) = args.snapshots.iter().find(|&&t| t > args.m) {
        return Err(CliError::Usage(format!(
            "snapshot {t} is past --m {}",
            args.m
        )));
    }
    let d = args.d.unwrap_or(2);
    let spec = RunSpec::new(args.policy, args.n, d, args.seed)
        .tie_weight(args.tie_weight)
        .trace(args.trace.is_some());
    let mut engine = spec.engine(args.m)?;
    let mut state = AllocationState::new(args.n);
    let mut sink = Sink::new(args.out_dir.as_deref())?;

    let mut times = args.snapshots.clone();
    times.sort_unstable();
    times.dedup();
    for t in times {
        while state.t() < t {
            engine.step(&mut state)?;
        }
        if t < args.m {
            sink.write(
                &format!("histogram_t{t}.csv"),
                histogram_csv(&state).as_bytes(),
            )?;
        }
    }
    while state.t() < args.m {
        engine.step(&mut state)?;
    }
    let final_csv = histogram_csv(&state);
    if sink.has_dir() {
        sink.write("histogram.csv", final_csv.as_bytes())?;
    } else {
        print!("{final_csv}");
    }

    if let (Some(path), Some(trace)) = (&args.trace, engine.trace()) {
        let mut header = vec!["step".to_string()];
        header.extend((1..=trace.width()).map(|k| format!("option{k}")));
        header.extend(["chosen".to_string(), "tie_cardinality".to_string()]);
        let mut csv = Csv::new(&header);
        for rec in trace.iter() {
            // bins are written with 1-based labels
            let mut row = vec![rec.step.to_string()];
            row.extend(rec.options.iter().map(|o| (o + 1).to_string()));
            row.push((rec.chosen + 1).to_string());
            row.push(rec.tie_cardinality.to_string());
            csv.row(&row);
        }
        sink.write_at(path, csv.into_string().as_bytes())?;
    }

    let config = json!({
        "policy": args.policy,
        "m": args.m,
        "n": args.n,
        "d": d,
        "seed": args.seed,
        "snapshots": args.snapshots,
        "tie_weight": args.tie_weight,
        "trace": args.trace.as_ref().map(|p| p.display().to_string()),
    });
    sink.finish("simulate", config, Some(args.seed))
}
