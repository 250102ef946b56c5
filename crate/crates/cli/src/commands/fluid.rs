use std::path::PathBuf;

use clap::Parser;
use greedybins_core::fluid::{empty_fraction_closed_form, integrate, DEFAULT_STEP};

use crate::output::{fmt_g, Csv};
use crate::CliError;

#[derive(Debug, Parser)]
pub struct Args {
    #[arg(long)]
    d: u32,
    /// Horizon in balls per bin.
    #[arg(long)]
    c_end: f64,
    /// Highest tracked load; chosen automatically when absent.
    #[arg(long)]
    kmax: Option<usize>,
    /// RK4 step.
    #[arg(long, default_value_t = DEFAULT_STEP)]
    h: f64,
    /// Keep every N-th grid row (the last row is always kept).
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Output CSV file; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args) -> Result<(), CliError> {
    if args.stride == 0 {
        return Err(CliError::Usage("--stride must be at least 1".into()));
    }
    let sol = integrate(args.d, args.kmax, args.c_end, args.h)?;
    let mut header = vec!["c".to_string()];
    header.extend((0..=sol.k_max).map(|k| format!("z{k}")));
    header.push("z0_closed".into());
    let mut csv = Csv::new(&header);
    let last = sol.times.len() - 1;
    for (i, (c, z)) in sol.iter().enumerate() {
        if i % args.stride != 0 && i != last {
            continue;
        }
        let mut row = vec![fmt_g(c)];
        row.extend(z.iter().map(|&v| fmt_g(v)));
        row.push(fmt_g(empty_fraction_closed_form(c, args.d)));
        csv.row(&row);
    }
    let text = csv.into_string();
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
