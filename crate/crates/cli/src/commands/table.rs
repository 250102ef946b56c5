use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use greedybins_core::experiments::{run_experiment, ExperimentConfig, ExperimentKind};
use greedybins_core::fluid::empty_fraction_closed_form;
use greedybins_core::rankstats::uniform_least_fraction;
use greedybins_core::{AllocationState, OptionSet, PolicyKind, RunSpec, TieScript};

use crate::output::{fmt_g, fmt_sig, Csv};
use crate::CliError;

/// Empty-bin fractions of FAIR at `m = n`, taken as reference constants.
const FAIR_EMPTY: [(usize, f64); 2] = [(2, 0.2384), (3, 0.1770)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    #[value(name = "3.1")]
    EmptyBins,
    #[value(name = "4.1")]
    LeastBins,
    #[value(name = "5.1")]
    TieBreaks,
}

#[derive(Debug, Parser)]
pub struct Args {
    #[arg(value_enum)]
    which: Which,
    /// Add Monte Carlo cells next to the analytic ones.
    #[arg(long)]
    simulate: bool,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    replications: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the cells as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Cell {
    row: String,
    column: String,
    value: f64,
    display: String,
    source: &'static str,
}

/// Cells collected row by row, rendered as aligned text and as CSV.
struct Table {
    title: &'static str,
    columns: Vec<String>,
    cells: Vec<Cell>,
}

impl Table {
    fn push(&mut self, row: &str, column: &str, value: f64, display: String, source: &'static str) {
        if !self.columns.iter().any(|c| c == column) {
            self.columns.push(column.to_string());
        }
        self.cells.push(Cell {
            row: row.to_string(),
            column: column.to_string(),
            value,
            display,
            source,
        });
    }

    fn render(&self) -> String {
        let mut rows: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !rows.contains(&c.row.as_str()) {
                rows.push(&c.row);
            }
        }
        let text = |row: &str, col: &str| {
            self.cells
                .iter()
                .filter(|c| c.row == row && c.column == col)
                .map(|c| format!("{} [{}]", c.display, c.source))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut grid = vec![std::iter::once(String::new())
            .chain(self.columns.iter().cloned())
            .collect::<Vec<_>>()];
        for row in &rows {
            let mut line = vec![row.to_string()];
            line.extend(self.columns.iter().map(|c| {
                let t = text(row, c);
                if t.is_empty() {
                    "-".into()
                } else {
                    t
                }
            }));
            grid.push(line);
        }
        let widths: Vec<usize> = (0..grid[0].len())
            .map(|k| grid.iter().map(|r| r[k].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = format!("{}\n", self.title);
        for line in grid {
            let padded: Vec<String> = line
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:<w$}"))
                .collect();
            out.push_str(padded.join(" | ").trim_end());
            out.push('\n');
        }
        out
    }

    fn csv(&self, name: &str) -> String {
        let mut csv = Csv::new(&["table", "row", "column", "value", "display", "source"]);
        for c in &self.cells {
            csv.row(&[
                name,
                &c.row,
                &c.column,
                &fmt_g(c.value),
                &c.display.replace(',', " "),
                c.source,
            ]);
        }
        csv.into_string()
    }
}

/// Truncates to two decimals; the printed bound cells are floors.
fn floor2(v: f64) -> f64 {
    (v * 100.0 + 1e-9).floor() / 100.0
}

fn simulated_mean(
    config: &ExperimentConfig,
    threads: usize,
    stat: &str,
) -> Result<(f64, f64), CliError> {
    let out = run_experiment(config, threads)?;
    let s = out.report.stat(stat).expect("requested statistic exists");
    Ok((s.mean, s.ci()))
}

fn empty_bins(args: &Args, threads: usize) -> Result<Table, CliError> {
    let mut t = Table {
        title: "Expected number of empty bins after n balls",
        columns: Vec::new(),
        cells: Vec::new(),
    };
    for d in [2usize, 3, 4, 5] {
        let row = format!("d={d}");
        let g = empty_fraction_closed_form(1.0, d as u32);
        t.push(&row, "GREEDY", g, format!("{}n", fmt_sig(g, 4)), "analytic");
        let u = (-1f64).exp();
        t.push(
            &row,
            "UNIFORM",
            u,
            format!("{}n", fmt_sig(u, 4)),
            "analytic",
        );
        if let Some(&(_, f)) = FAIR_EMPTY.iter().find(|(fd, _)| *fd == d) {
            t.push(&row, "FAIR", f, format!("{f:.4}n"), "reference");
        }
        if args.simulate {
            for policy in [PolicyKind::Greedy, PolicyKind::Uniform, PolicyKind::Fair] {
                let mut cfg =
                    ExperimentConfig::new(ExperimentKind::Histogram, args.n as u64, args.n);
                cfg.policy = policy;
                cfg.d = d;
                cfg.replications = args.replications;
                cfg.seed = args.seed;
                let (mean, ci) = simulated_mean(&cfg, threads, "load0_fraction")?;
                let column = policy.name().to_ascii_uppercase();
                t.push(
                    &row,
                    &column,
                    mean,
                    format!("{}n±{}", fmt_sig(mean, 4), fmt_sig(ci, 2)),
                    "simulated",
                );
            }
        }
    }
    Ok(t)
}

fn least_bins(args: &Args, threads: usize) -> Result<Table, CliError> {
    let mut t = Table {
        title: "Fraction x of least loaded bins holding a fraction y of the balls, m = n",
        columns: Vec::new(),
        cells: Vec::new(),
    };
    let ys = [(1.0 / 3.0, "y=1/3"), (0.5, "y=1/2"), (2.0 / 3.0, "y=2/3")];
    let mut sims = Vec::new();
    if args.simulate {
        for (policy, d) in [
            (PolicyKind::Uniform, 1),
            (PolicyKind::Greedy, 2),
            (PolicyKind::Greedy, 3),
            (PolicyKind::Greedy, 4),
        ] {
            let mut cfg = ExperimentConfig::new(ExperimentKind::SubsetLoad, args.n as u64, args.n);
            cfg.policy = policy;
            cfg.d = d;
            cfg.y = ys.iter().map(|(y, _)| *y).collect();
            cfg.replications = args.replications;
            cfg.seed = args.seed;
            sims.push((policy, d, run_experiment(&cfg, threads)?.report));
        }
    }
    for (k, &(y, row)) in ys.iter().enumerate() {
        let u = uniform_least_fraction(y, 1.0)?;
        t.push(
            row,
            "UNIFORM",
            u,
            format!("x={}", fmt_sig(u, 3)),
            "analytic",
        );
        for d in [2u32, 3, 4] {
            let exact = y.powf(1.0 / d as f64);
            let shown = floor2(exact);
            t.push(
                row,
                &format!("d={d}"),
                shown,
                format!("x>={shown:.2}"),
                "bound",
            );
        }
        for (policy, d, report) in &sims {
            let s = &report.stats[k];
            let column = match policy {
                PolicyKind::Uniform => "UNIFORM".to_string(),
                _ => format!("d={d}"),
            };
            t.push(
                row,
                &column,
                s.mean,
                format!("x={}±{}", fmt_sig(s.mean, 4), fmt_sig(s.ci(), 2)),
                "simulated",
            );
        }
    }
    Ok(t)
}

/// Loads after each scripted step, starting from `start`.
fn scripted_path(start: &[u64], winner: usize) -> Result<Vec<AllocationState>, CliError> {
    let sets = [[1, 3], [1, 3], [2, 3], [2, 3]]
        .iter()
        .map(|s| OptionSet::from_one_based(s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut engine = RunSpec::new(PolicyKind::Greedy, 3, 2, 0)
        .scripted_options(Some(sets))
        .tie_script(Some(TieScript::from_one_based(&[winner])?))
        .engine(4)?;
    let mut state = AllocationState::from_loads(start.to_vec());
    let mut path = vec![state.clone()];
    for _ in 0..4 {
        engine.step(&mut state)?;
        path.push(state.clone());
    }
    Ok(path)
}

fn tie_breaks() -> Result<Table, CliError> {
    let mut t = Table {
        title: "Scripted loads for each starting vector and tie order",
        columns: vec!["S_t".into()],
        cells: Vec::new(),
    };
    let columns = [
        (&[2u64, 1, 1][..], 2usize, "211: B2>B3"),
        (&[2, 1, 1][..], 3, "211: B3>B2"),
        (&[1, 2, 1][..], 1, "121: B1>B3"),
        (&[1, 2, 1][..], 3, "121: B3>B1"),
    ];
    let sets = ["-", "{1,3}", "{1,3}", "{2,3}", "{2,3}"];
    let paths = columns
        .iter()
        .map(|(start, winner, _)| scripted_path(start, *winner))
        .collect::<Result<Vec<_>, _>>()?;
    for step in 0..=4 {
        let row = format!("t={step}");
        t.push(&row, "S_t", step as f64, sets[step].to_string(), "script");
        for ((_, _, name), path) in columns.iter().zip(&paths) {
            let loads = path[step].loads();
            let shown: String = loads.iter().map(u64::to_string).collect();
            let value = loads.iter().fold(0u64, |acc, &l| acc * 10 + l) as f64;
            t.push(&row, name, value, shown, "scripted");
        }
    }
    Ok(t)
}

pub fn run(args: Args, threads: usize) -> Result<(), CliError> {
    let (table, name) = match args.which {
        Which::EmptyBins => (empty_bins(&args, threads)?, "3.1"),
        Which::LeastBins => (least_bins(&args, threads)?, "4.1"),
        Which::TieBreaks => (tie_breaks()?, "5.1"),
    };
    print!("{}", table.render());
    if let Some(path) = &args.out {
        std::fs::write(path, table.csv(name)).map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}
