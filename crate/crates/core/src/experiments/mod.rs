//! Executable proof constructions and the Monte Carlo replication harness.
//!
//! Replication `r` of an experiment with base seed `s` runs with seed
//! `replication_seed(s, r)`. Replications run on a rayon pool and are
//! aggregated in index order, so reports do not depend on the thread count.

pub mod config;
pub mod coupling;
pub mod gambler;
pub mod influence;
pub mod paradox;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{maxload_bound, paradox_prob_bound, RegimeValue};
use crate::engine::{replication_seed, AllocationState, PolicyKind, RunSpec};
use crate::error::{Error, Result};
use crate::rankstats::{dense_histogram, equal_pair_stats, LoadProfile};

pub use config::{ExperimentConfig, ExperimentKind};
pub use coupling::{couple_uniform_greedy, max_load_trial, CoupledRun, MaxLoadTrial};
pub use gambler::{gambler_trial, gap_for_delta, GamblerOutcome, GamblerSpec};
pub use influence::{influence_set_evolve, InfluenceSet, InfluenceStep};
pub use paradox::{paradox_trial, ParadoxOutcome, ParadoxSpec, TieCoupling};

/// Loads `0..HISTOGRAM_LEVELS` get their own statistic in histogram runs.
pub const HISTOGRAM_LEVELS: u64 = 8;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.96;

/// Maps `f` over `0..count` on a pool of `threads` workers (0 = all cores)
/// and returns results in index order. The lowest failing index wins.
pub fn parallel_map<T, F>(count: usize, threads: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<T>> = pool.install(|| (0..count).into_par_iter().map(&f).collect());
    results.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatEstimate {
    pub name: String,
    pub mean: f64,
    /// Sample variance; undefined for a single replication.
    pub variance: Option<f64>,
    /// Half-width of the normal 95% interval, `1.96·sqrt(var/R)`.
    pub ci_half_width: Option<f64>,
}

impl StatEstimate {
    fn from_samples(name: &str, xs: impl Iterator<Item = f64> + Clone) -> Self {
        let r = xs.clone().count();
        let mean = xs.clone().sum::<f64>() / r as f64;
        let variance =
            (r > 1).then(|| xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (r - 1) as f64);
        Self {
            name: name.to_string(),
            mean,
            variance,
            ci_half_width: variance.map(|v| Z95 * (v / r as f64).sqrt()),
        }
    }

    /// CI half-width, or 0 when undefined.
    pub fn ci(&self) -> f64 {
        self.ci_half_width.unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub observed: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn at_most(name: &str, observed: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            observed,
            threshold,
            passed: observed <= threshold,
        }
    }
}

/// Aggregate of one experiment. Serialises deterministically; wall time is
/// kept out of the serialised form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub kind: ExperimentKind,
    pub policy: PolicyKind,
    pub m: u64,
    pub n: usize,
    pub d: usize,
    pub replications: usize,
    pub base_seed: u64,
    pub variance_defined: bool,
    pub stats: Vec<StatEstimate>,
    pub counters: BTreeMap<String, u64>,
    pub checks: Vec<CheckOutcome>,
    pub details: BTreeMap<String, String>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl EstimateReport {
    pub fn stat(&self, name: &str) -> Option<&StatEstimate> {
        self.stats.iter().find(|s| s.name == name)
    }

    /// All checks passed (vacuously true without checks).
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observation {
    pub replication: usize,
    pub seed: u64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub report: EstimateReport,
    /// Column names for `Observation::values`.
    pub stat_names: Vec<String>,
    pub observations: Vec<Observation>,
}

/// What one replication returns besides its statistics.
#[derive(Default)]
struct Sample {
    values: Vec<f64>,
    details: BTreeMap<String, String>,
}

pub fn run_experiment(config: &ExperimentConfig, threads: usize) -> Result<ExperimentOutput> {
    run_experiment_with_progress(config, threads, None)
}

/// As [`run_experiment`], bumping `progress` after each finished replication.
pub fn run_experiment_with_progress(
    config: &ExperimentConfig,
    threads: usize,
    progress: Option<&AtomicUsize>,
) -> Result<ExperimentOutput> {
    config.validate()?;
    let started = Instant::now();
    let names = stat_names(config);
    let samples = parallel_map(config.replications, threads, |r| {
        let seed = replication_seed(config.seed, r as u64);
        let sample = replicate(config, seed).map_err(|e| Error::Replication {
            replication: r,
            seed,
            source: Box::new(e),
        })?;
        debug_assert_eq!(sample.values.len(), names.len());
        if let Some(p) = progress {
            p.fetch_add(1, Ordering::Relaxed);
        }
        Ok(sample)
    })?;

    let stats = names
        .iter()
        .enumerate()
        .map(|(k, name)| StatEstimate::from_samples(name, samples.iter().map(move |s| s.values[k])))
        .collect::<Vec<_>>();
    let mut report = EstimateReport {
        kind: config.kind,
        policy: config.policy,
        m: config.m,
        n: config.n,
        d: config.d,
        replications: config.replications,
        base_seed: config.seed,
        variance_defined: config.replications > 1,
        stats,
        counters: BTreeMap::new(),
        checks: Vec::new(),
        details: BTreeMap::new(),
        wall_time: Duration::ZERO,
    };
    if config.replications == 1 {
        report.details = samples[0].details.clone();
    }
    summarize(config, &names, &samples, &mut report)?;
    report.wall_time = started.elapsed();

    let observations = samples
        .into_iter()
        .enumerate()
        .map(|(r, s)| Observation {
            replication: r,
            seed: replication_seed(config.seed, r as u64),
            values: s.values,
        })
        .collect();
    Ok(ExperimentOutput {
        report,
        stat_names: names,
        observations,
    })
}

fn snapshot_times(config: &ExperimentConfig) -> Vec<u64> {
    let mut times: Vec<u64> = config.snapshots.clone();
    times.push(config.m);
    times.sort_unstable();
    times.dedup();
    times
}

fn snapshot_suffix(t: u64, m: u64) -> String {
    if t == m {
        String::new()
    } else {
        format!("_t{t}")
    }
}

fn stat_names(config: &ExperimentConfig) -> Vec<String> {
    let fixed = |names: &[&str]| names.iter().map(|s| s.to_string()).collect();
    match config.kind {
        ExperimentKind::Histogram => snapshot_times(config)
            .into_iter()
            .flat_map(|t| {
                let suffix = snapshot_suffix(t, config.m);
                (0..HISTOGRAM_LEVELS)
                    .map(move |k| format!("load{k}_fraction{suffix}"))
                    .chain(std::iter::once(format!(
                        "max_load{}",
                        snapshot_suffix(t, config.m)
                    )))
            })
            .collect(),
        ExperimentKind::SubsetLoad => config
            .x
            .iter()
            .map(|x| format!("least_share_x{x}"))
            .chain(config.y.iter().map(|y| format!("least_fraction_y{y}")))
            .collect(),
        ExperimentKind::EqualLoads => fixed(&["pair_count", "pair_fraction", "max_multiplicity"]),
        ExperimentKind::Couple => fixed(&["greedy_max_load", "uniform_max_load", "dominated"]),
        ExperimentKind::Paradox => fixed(&[
            "paradox",
            "certified",
            "certified_paradox",
            "load_from_ei",
            "load_from_ej",
            "influence_size",
        ]),
        ExperimentKind::Gambler => fixed(&["swapped", "final_gap"]),
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn join_loads(state: &AllocationState) -> String {
    state
        .loads()
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn policy_run(config: &ExperimentConfig, seed: u64) -> RunSpec {
    RunSpec::new(config.policy, config.n, config.d, seed).tie_weight(config.tie_weight)
}

fn gambler_gap(config: &ExperimentConfig) -> Result<u64> {
    match (config.gap, config.delta) {
        (Some(g), _) => Ok(g),
        (None, Some(delta)) => gap_for_delta(delta, config.n, config.d),
        (None, None) => Err(Error::config("gambler needs gap or delta")),
    }
}

fn replicate(config: &ExperimentConfig, seed: u64) -> Result<Sample> {
    let mut sample = Sample::default();
    let values = &mut sample.values;
    match config.kind {
        ExperimentKind::Histogram => {
            let mut engine = policy_run(config, seed).engine(config.m)?;
            let mut state = AllocationState::new(config.n);
            let n = config.n as f64;
            for t in snapshot_times(config) {
                while state.t() < t {
                    engine.step(&mut state)?;
                }
                let hist = dense_histogram(&state);
                for k in 0..HISTOGRAM_LEVELS as usize {
                    values.push(hist.get(k).copied().unwrap_or(0) as f64 / n);
                }
                values.push(state.max_load() as f64);
            }
        }
        ExperimentKind::SubsetLoad => {
            let state = policy_run(config, seed).execute(config.m, None)?.state;
            let profile = LoadProfile::new(&state);
            let total = (state.t().max(1)) as f64;
            for &x in &config.x {
                values.push(profile.least_subset_load(x)? as f64 / total);
            }
            for &y in &config.y {
                values.push(profile.least_fraction_for_share(y)?);
            }
        }
        ExperimentKind::EqualLoads => {
            let state = policy_run(config, seed).execute(config.m, None)?.state;
            let s = equal_pair_stats(&state, config.excluded)?;
            values.extend([
                s.pair_count as f64,
                s.pair_fraction(),
                s.max_multiplicity as f64,
            ]);
        }
        ExperimentKind::Couple => {
            let run = couple_uniform_greedy(config.m, config.n, config.d, seed)?;
            values.extend([
                run.greedy.max_load() as f64,
                run.uniform.max_load() as f64,
                flag(run.dominance),
            ]);
        }
        ExperimentKind::Paradox => {
            let mut spec = ParadoxSpec::new(
                config.base_state(),
                config.i - 1,
                config.j - 1,
                config.m,
                config.d,
                seed,
            );
            spec.coupling = config.tie_coupling;
            spec.tie_scripts = config.tie_scripts()?;
            spec.options = config.option_sets()?;
            let out = paradox_trial(&spec)?;
            let certified = out.influence.certifies_no_chain();
            values.extend([
                flag(out.paradox),
                flag(certified),
                flag(out.paradox && certified),
                out.load_from_ei as f64,
                out.load_from_ej as f64,
                out.influence.len() as f64,
            ]);
            sample
                .details
                .insert("final_from_ei".into(), join_loads(&out.final_from_ei));
            sample
                .details
                .insert("final_from_ej".into(), join_loads(&out.final_from_ej));
        }
        ExperimentKind::Gambler => {
            let mut spec =
                GamblerSpec::new(gambler_gap(config)?, config.n, config.d, config.m, seed);
            spec.base = config.base.clone().map(AllocationState::from_loads);
            let out = gambler_trial(&spec)?;
            values.extend([flag(out.swapped), out.final_gap as f64]);
        }
    }
    Ok(sample)
}

fn column_sum(names: &[String], samples: &[Sample], name: &str) -> u64 {
    let k = names
        .iter()
        .position(|n| n == name)
        .expect("statistic is declared for this kind");
    samples.iter().map(|s| s.values[k] as u64).sum()
}

fn summarize(
    config: &ExperimentConfig,
    names: &[String],
    samples: &[Sample],
    report: &mut EstimateReport,
) -> Result<()> {
    let r = config.replications as f64;
    match config.kind {
        ExperimentKind::Couple => {
            let dominated = column_sum(names, samples, "dominated");
            report.counters.insert(
                "dominance_failures".into(),
                config.replications as u64 - dominated,
            );
            report.checks.push(CheckOutcome::at_most(
                "dominance_failures",
                (config.replications as u64 - dominated) as f64,
                0.0,
            ));
            if let Some(eps) = config.eps {
                let c = config.m as f64 / config.n as f64;
                let bound = maxload_bound(c, config.d as f64, config.n as u64, eps)?;
                if let RegimeValue::InRegime { value, .. } = bound.constant {
                    let k = names
                        .iter()
                        .position(|n| n == "greedy_max_load")
                        .unwrap_or(0);
                    let violations = samples.iter().filter(|s| s.values[k] >= value).count() as u64;
                    report
                        .counters
                        .insert("bound_violations".into(), violations);
                    report
                        .details
                        .insert("max_load_bound".into(), format!("{value}"));
                } else {
                    report
                        .details
                        .insert("max_load_bound".into(), "out of regime".into());
                }
            }
        }
        ExperimentKind::Paradox => {
            let paradoxes = column_sum(names, samples, "paradox");
            let certified = column_sum(names, samples, "certified");
            let certified_paradoxes = column_sum(names, samples, "certified_paradox");
            report.counters.insert("paradoxes".into(), paradoxes);
            report.counters.insert("certified_trials".into(), certified);
            report
                .counters
                .insert("certified_paradoxes".into(), certified_paradoxes);
            report.checks.push(CheckOutcome::at_most(
                "certified_paradoxes",
                certified_paradoxes as f64,
                0.0,
            ));
            if config.options.is_none() && config.tie_script_i.is_none() {
                let bound = paradox_prob_bound(config.m as f64, config.n as u64, config.d as u32);
                report.checks.push(CheckOutcome::at_most(
                    "paradox_frequency",
                    paradoxes as f64 / r,
                    bound.raw,
                ));
            }
        }
        ExperimentKind::Gambler => {
            let gap = gambler_gap(config)?;
            let swaps = column_sum(names, samples, "swapped");
            report.counters.insert("swaps".into(), swaps);
            report.details.insert("gap0".into(), gap.to_string());
            if config.d >= 2 {
                let delta = config
                    .delta
                    .unwrap_or(gap as f64 * (config.d - 1) as f64 / config.n as f64);
                let p = (-delta).exp();
                report.checks.push(CheckOutcome::at_most(
                    "swap_frequency",
                    swaps as f64 / r,
                    p + 3.0 * (p / r).sqrt(),
                ));
            }
        }
        ExperimentKind::SubsetLoad if config.policy == PolicyKind::Greedy => {
            for &x in &config.x {
                let stat = report
                    .stat(&format!("least_share_x{x}"))
                    .expect("declared statistic");
                let threshold = x.powi(config.d as i32) + stat.ci();
                let observed = stat.mean;
                report.checks.push(CheckOutcome::at_most(
                    &format!("least_share_x{x}"),
                    observed,
                    threshold,
                ));
            }
        }
        _ => {}
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_replication_has_no_variance() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Histogram, 50, 50);
        cfg.seed = 3;
        let out = run_experiment(&cfg, 1).unwrap();
        assert!(!out.report.variance_defined);
        assert!(out.report.stats.iter().all(|s| s.variance.is_none()));
        assert_eq!(out.observations.len(), 1);
        assert_eq!(out.observations[0].seed, replication_seed(3, 0));
    }

    #[test]
    fn histogram_fractions_sum_to_one_with_enough_levels() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Histogram, 200, 400);
        cfg.snapshots = vec![0, 100];
        cfg.replications = 3;
        let out = run_experiment(&cfg, 2).unwrap();
        assert_eq!(out.stat_names.len(), 3 * (HISTOGRAM_LEVELS as usize + 1));
        assert_eq!(out.report.stat("load0_fraction_t0").unwrap().mean, 1.0);
        assert!(out.report.stat("load0_fraction_t100").unwrap().mean >= 0.75);
    }

    #[test]
    fn thread_count_does_not_change_report() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Paradox, 30, 60);
        cfg.replications = 40;
        cfg.seed = 77;
        let a = run_experiment(&cfg, 1).unwrap();
        let b = run_experiment(&cfg, 4).unwrap();
        assert_eq!(a.observations, b.observations);
        assert_eq!(a.report.stats, b.report.stats);
        assert_eq!(a.report.counters, b.report.counters);
    }

    #[test]
    fn failure_names_the_seed() {
        // every replication fails on bin 3 of 2; the lowest index is reported
        let mut cfg = ExperimentConfig::new(ExperimentKind::Paradox, 1, 2);
        cfg.options = Some(vec![vec![1, 3]]);
        cfg.replications = 2;
        let err = run_experiment(&cfg, 1).unwrap_err();
        match err {
            Error::Replication {
                replication, seed, ..
            } => {
                assert_eq!(replication, 0);
                assert_eq!(seed, replication_seed(0, 0));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn adding_replications_keeps_earlier_ones() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::EqualLoads, 100, 50);
        cfg.replications = 3;
        let short = run_experiment(&cfg, 1).unwrap();
        cfg.replications = 6;
        let long = run_experiment(&cfg, 3).unwrap();
        assert_eq!(short.observations[..], long.observations[..3]);
    }

    #[test]
    fn gambler_and_couple_checks() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Gambler, 2000, 20);
        cfg.delta = Some(1.0);
        cfg.replications = 20;
        let out = run_experiment(&cfg, 1).unwrap();
        assert_eq!(out.report.details["gap0"], "20");
        assert_eq!(out.report.checks.len(), 1);

        let mut cfg = ExperimentConfig::new(ExperimentKind::Couple, 300, 100);
        cfg.replications = 5;
        cfg.eps = Some(0.5);
        let out = run_experiment(&cfg, 1).unwrap();
        assert!(out.report.passed());
        assert_eq!(out.report.counters["dominance_failures"], 0);
    }

    #[test]
    fn parallel_map_keeps_order_and_first_error() {
        let v = parallel_map(10, 3, |i| Ok(i * i)).unwrap();
        assert_eq!(v, (0..10).map(|i| i * i).collect::<Vec<_>>());
        let err = parallel_map(10, 3, |i| {
            if i % 4 == 3 {
                Err(Error::Numerical(format!("{i}")))
            } else {
                Ok(i)
            }
        })
        .unwrap_err();
        assert_eq!(err, Error::Numerical("3".into()));
    }
}
