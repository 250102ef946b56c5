use crate::bounds::{maxload_bound, RegimeValue};
use crate::engine::{replication_seed, AllocationState, PolicyKind, RunSpec};
use crate::error::{Error, Result};
use crate::experiments::parallel_map;

/// GREEDY(m, n, d) and UNIFORM(dm, n) driven by one option stream.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledRun {
    pub greedy: AllocationState,
    pub uniform: AllocationState,
    /// Every UNIFORM bin is at least as full as its GREEDY counterpart.
    pub dominance: bool,
}

/// At each GREEDY step the UNIFORM side gets one ball in every slot of the
/// option set (a bin sampled twice gets two balls).
pub fn couple_uniform_greedy(m: u64, n: usize, d: usize, seed: u64) -> Result<CoupledRun> {
    let mut engine = RunSpec::new(PolicyKind::Greedy, n, d, seed).engine(m)?;
    let mut greedy = AllocationState::new(n);
    let mut uniform = AllocationState::new(n);
    for _ in 0..m {
        engine.step(&mut greedy)?;
        for &o in engine.last_options() {
            uniform.increment(o);
        }
    }
    let dominance = uniform
        .loads()
        .iter()
        .zip(greedy.loads())
        .all(|(u, g)| u >= g);
    Ok(CoupledRun {
        greedy,
        uniform,
        dominance,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxLoadTrial {
    pub m: u64,
    /// Threshold `(2+ε) ln n / (ln ln n − ln d − ln c)`.
    pub bound: f64,
    /// Runs whose maximum load reached the bound.
    pub violations: usize,
    pub frequency: f64,
    pub greedy_max: Vec<u64>,
    /// Maximum load of the coupled UNIFORM(dm, n) partner of each run.
    pub uniform_max: Vec<u64>,
}

impl MaxLoadTrial {
    /// Runs where GREEDY's maximum exceeded its coupled UNIFORM maximum.
    pub fn coupling_breaches(&self) -> usize {
        self.greedy_max
            .iter()
            .zip(&self.uniform_max)
            .filter(|(g, u)| g > u)
            .count()
    }
}

/// Fraction of `replications` runs of GREEDY(cn, n, d) whose maximum load is
/// at least the high-probability bound.
pub fn max_load_trial(
    c: f64,
    d: usize,
    n: usize,
    eps: f64,
    replications: usize,
    seed: u64,
    threads: usize,
) -> Result<MaxLoadTrial> {
    if replications == 0 {
        return Err(Error::invalid("replications", "need at least one"));
    }
    let bound = match maxload_bound(c, d as f64, n.max(2) as u64, eps)?.constant {
        RegimeValue::InRegime { value, .. } => value,
        RegimeValue::OutOfRegime { denominator } => {
            return Err(Error::invalid(
                "c, d, n",
                format!("max-load bound out of regime (denominator {denominator})"),
            ))
        }
    };
    let m = (c * n as f64).round() as u64;
    let runs = parallel_map(replications, threads, |r| {
        let s = replication_seed(seed, r as u64);
        couple_uniform_greedy(m, n, d, s)
            .map(|run| (run.greedy.max_load(), run.uniform.max_load()))
            .map_err(|e| Error::Replication {
                replication: r,
                seed: s,
                source: Box::new(e),
            })
    })?;
    let (greedy_max, uniform_max): (Vec<u64>, Vec<u64>) = runs.into_iter().unzip();
    let violations = greedy_max.iter().filter(|&&g| g as f64 >= bound).count();
    Ok(MaxLoadTrial {
        m,
        bound,
        violations,
        frequency: violations as f64 / replications as f64,
        greedy_max,
        uniform_max,
    })
}
