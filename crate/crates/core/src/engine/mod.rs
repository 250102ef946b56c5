//! The three allocation policies and the run driver.
//!
//! Bins are 0-based here; every human-facing surface (CLI output, error
//! messages) shows them 1-based.

pub mod rng;
mod state;
mod ties;
mod trace;

pub use rng::{replication_seed, OptionStream, RngStreams, TieStream};
pub use state::{AllocationState, OptionSet, PolicyKind, TieWeight};
pub use ties::{Placement, TieBreaker, TieScript};
pub use trace::{Trace, TraceRecord};

use crate::error::{Error, Result};

/// Resource caps checked before a run starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_n: u64,
    pub max_m: u64,
    /// Largest run for which a trace may be recorded.
    pub max_traced_m: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_n: 100_000_000,
            max_m: 10_000_000_000,
            max_traced_m: 10_000_000,
        }
    }
}

/// Samples `d` bins uniformly with replacement.
pub fn draw_option_set(n: usize, d: usize, rng: &mut OptionStream) -> OptionSet {
    let mut choices = vec![0; d];
    fill_options(n, &mut choices, rng);
    OptionSet::new(choices)
}

#[inline]
fn fill_options(n: usize, out: &mut [usize], rng: &mut OptionStream) {
    let n = n as u32;
    for slot in out {
        *slot = rng.index(n) as usize;
    }
}

fn check_options(state: &AllocationState, options: &[usize]) -> Result<()> {
    if options.is_empty() {
        return Err(Error::config("empty option set"));
    }
    if let Some(&bad) = options.iter().find(|&&o| o >= state.n()) {
        return Err(Error::config(format!(
            "option {} out of range for {} bins",
            bad + 1,
            state.n()
        )));
    }
    Ok(())
}

/// Places one ball in the most loaded option; ties go to the tie breaker.
pub fn place_greedy(
    state: &mut AllocationState,
    options: &[usize],
    ties: &mut TieBreaker,
) -> Result<usize> {
    check_options(state, options)?;
    ties.begin_step();
    greedy_step(state, options, ties).map(|p| p.bin)
}

/// Places one ball in the least loaded option; ties go to the tie breaker.
pub fn place_fair(
    state: &mut AllocationState,
    options: &[usize],
    ties: &mut TieBreaker,
) -> Result<usize> {
    check_options(state, options)?;
    ties.begin_step();
    fair_step(state, options, ties).map(|p| p.bin)
}

/// Places one ball in a uniformly random bin.
pub fn place_uniform(state: &mut AllocationState, rng: &mut OptionStream) -> usize {
    let bin = rng.index(state.n() as u32) as usize;
    state.increment(bin);
    bin
}

#[inline]
fn greedy_step(
    state: &mut AllocationState,
    options: &[usize],
    ties: &mut TieBreaker,
) -> Result<Placement> {
    let p = ties.choose(state.loads(), options, |a, b| a > b)?;
    state.increment(p.bin);
    Ok(p)
}

#[inline]
fn fair_step(
    state: &mut AllocationState,
    options: &[usize],
    ties: &mut TieBreaker,
) -> Result<Placement> {
    let p = ties.choose(state.loads(), options, |a, b| a < b)?;
    state.increment(p.bin);
    Ok(p)
}

/// Where option sets come from.
// Random is the per-ball hot path; boxing it would add a pointer chase.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
enum OptionSource {
    Random(OptionStream),
    Scripted { sets: Vec<OptionSet>, next: usize },
}

/// Full description of a run, minus the ball count and starting state.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub policy: PolicyKind,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub record_trace: bool,
    pub tie_weight: TieWeight,
    pub tie_script: Option<TieScript>,
    /// Replaces random option sets; for UNIFORM the first entry of each set
    /// is the bin.
    pub scripted_options: Option<Vec<OptionSet>>,
    /// Overrides the tie key derived from `seed`.
    pub tie_key: Option<u64>,
    pub limits: Limits,
}

impl RunSpec {
    pub fn new(policy: PolicyKind, n: usize, d: usize, seed: u64) -> Self {
        Self {
            policy,
            n,
            d,
            seed,
            record_trace: false,
            tie_weight: TieWeight::PerBin,
            tie_script: None,
            scripted_options: None,
            tie_key: None,
            limits: Limits::default(),
        }
    }

    pub fn trace(mut self, on: bool) -> Self {
        self.record_trace = on;
        self
    }

    pub fn tie_weight(mut self, weight: TieWeight) -> Self {
        self.tie_weight = weight;
        self
    }

    pub fn tie_script(mut self, script: Option<TieScript>) -> Self {
        self.tie_script = script;
        self
    }

    pub fn scripted_options(mut self, sets: Option<Vec<OptionSet>>) -> Self {
        self.scripted_options = sets;
        self
    }

    pub fn tie_key(mut self, key: Option<u64>) -> Self {
        self.tie_key = key;
        self
    }

    pub fn limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    /// Number of option slots per step for this policy.
    pub fn width(&self) -> usize {
        match self.policy {
            PolicyKind::Uniform => 1,
            _ => self.d,
        }
    }

    fn validate(&self, m: u64) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n", "need at least one bin"));
        }
        if self.d == 0 {
            return Err(Error::invalid("d", "need at least one choice"));
        }
        if self.n as u64 > self.limits.max_n {
            return Err(Error::Capacity {
                what: "n",
                requested: self.n as u64,
                limit: self.limits.max_n,
            });
        }
        if m > self.limits.max_m {
            return Err(Error::Capacity {
                what: "m",
                requested: m,
                limit: self.limits.max_m,
            });
        }
        if self.record_trace && m > self.limits.max_traced_m {
            return Err(Error::Capacity {
                what: "traced m",
                requested: m,
                limit: self.limits.max_traced_m,
            });
        }
        if let Some(sets) = &self.scripted_options {
            if (sets.len() as u64) < m {
                return Err(Error::config(format!(
                    "{} scripted option sets for {} balls",
                    sets.len(),
                    m
                )));
            }
            for (k, s) in sets.iter().enumerate() {
                if s.len() != self.width() {
                    return Err(Error::config(format!(
                        "scripted option set {} has {} entries, expected {}",
                        k + 1,
                        s.len(),
                        self.width()
                    )));
                }
                if let Some(&bad) = s.choices.iter().find(|&&o| o >= self.n) {
                    return Err(Error::config(format!(
                        "scripted option set {} names bin {} of {}",
                        k + 1,
                        bad + 1,
                        self.n
                    )));
                }
            }
        }
        Ok(())
    }

    /// Builds a step-wise engine for a run of at most `m` balls.
    pub fn engine(&self, m: u64) -> Result<Engine> {
        self.validate(m)?;
        let streams = RngStreams::from_seed(self.seed);
        let tie_stream = match self.tie_key {
            Some(k) => TieStream::new(k),
            None => streams.ties,
        };
        let source = match &self.scripted_options {
            Some(sets) => OptionSource::Scripted {
                sets: sets.clone(),
                next: 0,
            },
            None => OptionSource::Random(streams.options),
        };
        let width = self.width();
        Ok(Engine {
            policy: self.policy,
            n: self.n,
            source,
            ties: TieBreaker::new(tie_stream)
                .with_script(self.tie_script.clone())
                .with_weight(self.tie_weight),
            options: vec![0; width],
            last: None,
            trace: self
                .record_trace
                .then(|| Trace::with_capacity(width, m.min(1 << 20) as usize)),
        })
    }

    /// Places `m` balls starting from `initial` (or empty bins).
    pub fn execute(&self, m: u64, initial: Option<AllocationState>) -> Result<RunOutput> {
        let mut state = match initial {
            Some(s) if s.n() != self.n => {
                return Err(Error::config(format!(
                    "initial state has {} bins, run has {}",
                    s.n(),
                    self.n
                )))
            }
            Some(s) => s,
            None => AllocationState::new(self.n),
        };
        let mut engine = self.engine(m)?;
        for _ in 0..m {
            engine.step(&mut state)?;
        }
        Ok(RunOutput {
            state,
            trace: engine.into_trace(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: AllocationState,
    pub trace: Option<Trace>,
}

/// Step-wise driver; lets callers observe the state between placements.
#[derive(Debug, Clone)]
pub struct Engine {
    policy: PolicyKind,
    n: usize,
    source: OptionSource,
    ties: TieBreaker,
    options: Vec<usize>,
    last: Option<Placement>,
    trace: Option<Trace>,
}

impl Engine {
    /// Places one ball and returns the chosen bin.
    #[inline]
    pub fn step(&mut self, state: &mut AllocationState) -> Result<usize> {
        debug_assert_eq!(state.n(), self.n);
        match &mut self.source {
            OptionSource::Random(rng) => fill_options(self.n, &mut self.options, rng),
            OptionSource::Scripted { sets, next } => {
                let set = sets.get(*next).ok_or_else(|| {
                    Error::config(format!("option script exhausted after {} steps", *next))
                })?;
                self.options.copy_from_slice(&set.choices);
                *next += 1;
            }
        }
        self.ties.begin_step();
        let placement = match self.policy {
            PolicyKind::Uniform => {
                let bin = self.options[0];
                state.increment(bin);
                Placement {
                    bin,
                    tie_cardinality: 1,
                }
            }
            PolicyKind::Greedy => greedy_step(state, &self.options, &mut self.ties)?,
            PolicyKind::Fair => fair_step(state, &self.options, &mut self.ties)?,
        };
        if let Some(trace) = &mut self.trace {
            trace.push(&self.options, placement.bin, placement.tie_cardinality);
        }
        self.last = Some(placement);
        Ok(placement.bin)
    }

    /// Option set sampled by the most recent step.
    pub fn last_options(&self) -> &[usize] {
        &self.options
    }

    pub fn last_placement(&self) -> Option<Placement> {
        self.last
    }

    pub fn steps(&self) -> u64 {
        self.ties.step()
    }

    pub fn ties_seen(&self) -> u64 {
        self.ties.ties_seen()
    }

    pub fn trace(&self) -> Option<&Trace> {
        self.trace.as_ref()
    }

    pub fn into_trace(self) -> Option<Trace> {
        self.trace
    }
}

/// Runs `policy` for `m` balls on `n` bins with `d` choices.
pub fn run(
    policy: PolicyKind,
    m: u64,
    n: usize,
    d: usize,
    seed: u64,
    record_trace: bool,
    initial: Option<AllocationState>,
) -> Result<(AllocationState, Option<Trace>)> {
    let out = RunSpec::new(policy, n, d, seed)
        .trace(record_trace)
        .execute(m, initial)?;
    Ok((out.state, out.trace))
}
