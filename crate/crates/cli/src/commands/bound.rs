use clap::{Parser, Subcommand};
use greedybins_core::bounds::{
    bias_epsilon, chernoff_upper, equal_load_bound, equal_load_precondition, maxload_bound,
    paradox_exponent, paradox_prob_bound, ruin_probability, subset_lower_bound, subset_tail_bound,
    subset_upper_bound, swap_gap_and_bound, EqualLoadParams, RegimeValue,
};
use greedybins_core::Error;
use serde_json::{json, Value};

use crate::output::fmt_g;
use crate::CliError;

#[derive(Debug, Parser)]
pub struct Args {
    #[command(subcommand)]
    which: Which,
}

#[derive(Debug, Subcommand)]
enum Which {
    /// Starting gap δn/(d−1) and swap probability e^{−δ}.
    Swap {
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1000)]
        n: u64,
        #[arg(long, default_value_t = 2)]
        d: u32,
    },
    /// x^d·m: expected balls in the least xn bins, upper bound.
    SubsetUpper {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        m: f64,
    },
    /// Tail bound on the least xn bins holding at least k balls.
    SubsetTail {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        k: u64,
    },
    /// Case-split lower bound on the least xn bins.
    SubsetLower {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        m: f64,
    },
    /// High-probability maximum load of GREEDY(cn, n, d).
    Maxload {
        #[arg(long)]
        c: f64,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        eps: f64,
    },
    /// Chernoff upper tail for the UNIFORM coupling partner.
    Chernoff {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        d: f64,
    },
    /// Ruin probability ((1−ε)/(1+ε))^x.
    Ruin {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        eps: f64,
    },
    /// Bias ε of the gap walk between the two least loaded bins.
    Bias {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        d: u32,
    },
    /// Chance of an intersecting option-set chain within t steps.
    Paradox {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        d: u32,
        /// Also report the polynomial order at t = c·n·ln n.
        #[arg(long)]
        c: Option<f64>,
    },
    /// Equal-load (j = 1) or j-gap probability product.
    EqualLoad {
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
        #[arg(long, default_value_t = 2)]
        d: u32,
        #[arg(long, default_value_t = 1)]
        j: u64,
    },
}

fn regime_json(v: &RegimeValue) -> Value {
    serde_json::to_value(v).expect("regime value serialises")
}

fn regime_text(v: &RegimeValue) -> String {
    match v.value() {
        Some(x) => fmt_g(x),
        None => "out-of-regime".into(),
    }
}

pub fn run(args: Args) -> Result<(), CliError> {
    let (value, detail) = evaluate(args.which)?;
    println!("{value}");
    println!("{detail}");
    Ok(())
}

fn evaluate(which: Which) -> Result<(String, Value), CliError> {
    Ok(match which {
        Which::Swap { delta, n, d } => {
            let b = swap_gap_and_bound(delta, n, d)?;
            (
                fmt_g(b.probability),
                json!({"bound": "swap", "delta": delta, "n": n, "d": d, "gap": b.gap, "probability": b.probability}),
            )
        }
        Which::SubsetUpper { x, d, m } => {
            let v = subset_upper_bound(x, d, m)?;
            (
                fmt_g(v),
                json!({"bound": "subset-upper", "x": x, "d": d, "m": m, "value": v}),
            )
        }
        Which::SubsetTail { x, d, m, k } => {
            let v = subset_tail_bound(x, d, m, k)?;
            (
                fmt_g(v),
                json!({"bound": "subset-tail", "x": x, "d": d, "m": m, "k": k, "value": v}),
            )
        }
        Which::SubsetLower { x, n, d, m } => {
            let b = subset_lower_bound(x, n, d, m)?;
            (
                fmt_g(b.value),
                json!({"bound": "subset-lower", "x": x, "n": n, "d": d, "m": m, "case": b.case,
                       "value": b.value, "sketch": b.sketch}),
            )
        }
        Which::Maxload { c, d, n, eps } => {
            let b = maxload_bound(c, d, n, eps)?;
            (
                regime_text(&b.constant),
                json!({"bound": "maxload", "c": c, "d": d, "n": n, "eps": eps,
                       "constant": regime_json(&b.constant), "general": regime_json(&b.general)}),
            )
        }
        Which::Chernoff { beta, c, d } => {
            let v = chernoff_upper(beta, c, d)?;
            (
                fmt_g(v),
                json!({"bound": "chernoff", "beta": beta, "c": c, "d": d, "value": v}),
            )
        }
        Which::Ruin { x, eps } => {
            let v = ruin_probability(x, eps)?;
            (
                fmt_g(v),
                json!({"bound": "ruin", "x": x, "eps": eps, "value": v}),
            )
        }
        Which::Bias { n, d } => {
            let v = bias_epsilon(n, d)?;
            (
                fmt_g(v),
                json!({"bound": "bias", "n": n, "d": d, "epsilon": v}),
            )
        }
        Which::Paradox { t, n, d, c } => {
            let p = paradox_prob_bound(t, n, d);
            (
                fmt_g(p.value),
                json!({"bound": "paradox", "t": t, "n": n, "d": d, "value": p.value, "raw": p.raw,
                       "diagnostic": p.diagnostic, "exponent": c.map(|c| paradox_exponent(c, d))}),
            )
        }
        Which::EqualLoad { delta, n, m, d, j } => {
            let params = EqualLoadParams {
                j,
                ..EqualLoadParams::asymptotic_choice(delta, n, m, d)?
            };
            let pre = equal_load_precondition(&params)?;
            match equal_load_bound(&params) {
                Ok(b) => (
                    fmt_g(b.bound),
                    json!({"bound": "equal-load", "params": params, "precondition": pre, "result": b}),
                ),
                Err(e @ Error::InvalidParameter { .. }) => {
                    // keep the precondition visible before failing
                    println!("undefined");
                    println!(
                        "{}",
                        json!({"bound": "equal-load", "params": params, "precondition": pre,
                               "error": e.to_string()})
                    );
                    return Err(e.into());
                }
                Err(e) => return Err(e.into()),
            }
        }
    })
}
