use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::time::Duration;

use clap::Parser;
use greedybins_core::experiments::{
    run_experiment_with_progress, ExperimentConfig, ExperimentOutput,
};

use crate::output::{fmt_g, Csv, Sink};
use crate::CliError;

#[derive(Debug, Parser)]
pub struct Args {
    /// key=value config file.
    config: PathBuf,
    /// Output directory; overrides the config's `output` key.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Exit with status 3 when an acceptance check fails.
    #[arg(long)]
    check: bool,
}

fn observations_csv(out: &ExperimentOutput) -> String {
    let mut header = vec!["replication".to_string(), "seed".to_string()];
    header.extend(out.stat_names.iter().cloned());
    let mut csv = Csv::new(&header);
    for obs in &out.observations {
        let mut row = vec![obs.replication.to_string(), obs.seed.to_string()];
        row.extend(obs.values.iter().map(|&v| fmt_g(v)));
        csv.row(&row);
    }
    csv.into_string()
}

fn run_with_progress(
    config: &ExperimentConfig,
    threads: usize,
) -> Result<ExperimentOutput, CliError> {
    let done = AtomicUsize::new(0);
    let finished = AtomicBool::new(false);
    let total = config.replications;
    std::thread::scope(|scope| {
        if total > 1 {
            scope.spawn(|| {
                let mut last = 0;
                while !finished.load(Ordering::Relaxed) {
                    std::thread::sleep(Duration::from_millis(200));
                    let now = done.load(Ordering::Relaxed);
                    if now != last && !finished.load(Ordering::Relaxed) {
                        eprintln!("progress: {now}/{total} replications");
                        last = now;
                    }
                }
            });
        }
        let result = run_experiment_with_progress(config, threads, Some(&done));
        finished.store(true, Ordering::Relaxed);
        result.map_err(CliError::from)
    })
}

pub fn run(args: Args, threads: usize) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let config = ExperimentConfig::parse(&text)?;
    let dir = args
        .out_dir
        .clone()
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .ok_or_else(|| {
            CliError::Usage("no output directory: pass --out-dir or set `output`".into())
        })?;

    let out = run_with_progress(&config, threads)?;
    let report = &out.report;
    let mut sink = Sink::new(Some(&dir))?;
    let json = serde_json::to_string_pretty(report).expect("report serialises") + "\n";
    sink.write("report.json", json.as_bytes())?;
    sink.write("observations.csv", observations_csv(&out).as_bytes())?;
    let resolved = serde_json::to_value(&config).expect("config serialises");
    sink.finish("experiment", resolved, Some(config.seed))?;

    eprintln!(
        "{} replications of {} in {:.2}s",
        report.replications,
        report.kind,
        report.wall_time.as_secs_f64()
    );
    for stat in &report.stats {
        let ci = stat
            .ci_half_width
            .map(|c| format!(" ± {}", fmt_g(c)))
            .unwrap_or_default();
        println!("{} = {}{}", stat.name, fmt_g(stat.mean), ci);
    }
    for (name, count) in &report.counters {
        println!("{name} = {count}");
    }
    for (name, value) in &report.details {
        println!("{name} = {value}");
    }
    let mut failed = Vec::new();
    for check in &report.checks {
        let verdict = if check.passed { "pass" } else { "FAIL" };
        println!(
            "check {}: {} <= {} {verdict}",
            check.name,
            fmt_g(check.observed),
            fmt_g(check.threshold)
        );
        if !check.passed {
            failed.push(check.name.clone());
        }
    }
    if args.check && !failed.is_empty() {
        return Err(CliError::Check(failed.join(", ")));
    }
    Ok(())
}
