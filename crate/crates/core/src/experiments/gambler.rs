use crate::engine::{AllocationState, PolicyKind, RunSpec};
use crate::error::{Error, Result};

/// Tracked bins: bin 0 starts `gap0` above bin 1.
pub const LARGER: usize = 0;
pub const SMALLER: usize = 1;

#[derive(Debug, Clone)]
pub struct GamblerSpec {
    pub gap0: u64,
    pub n: usize,
    pub d: usize,
    pub m: u64,
    pub seed: u64,
    /// Loads of the untracked bins; bin 1 keeps its base load and bin 0 is
    /// set `gap0` above it. All zero when absent.
    pub base: Option<AllocationState>,
    pub record_path: bool,
}

impl GamblerSpec {
    pub fn new(gap0: u64, n: usize, d: usize, m: u64, seed: u64) -> Self {
        Self {
            gap0,
            n,
            d,
            m,
            seed,
            base: None,
            record_path: false,
        }
    }

    pub fn initial_state(&self) -> Result<AllocationState> {
        if self.n < 2 {
            return Err(Error::invalid("n", "need two bins to track"));
        }
        let mut loads = match &self.base {
            Some(b) if b.n() != self.n => {
                return Err(Error::config(format!(
                    "base configuration has {} bins, run has {}",
                    b.n(),
                    self.n
                )))
            }
            Some(b) => b.loads().to_vec(),
            None => vec![0; self.n],
        };
        loads[LARGER] = loads[SMALLER] + self.gap0;
        Ok(AllocationState::from_loads(loads))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GamblerOutcome {
    /// The initially larger tracked bin was strictly smaller at some step.
    pub swapped: bool,
    /// 1-based step of the first swap.
    pub swap_step: Option<u64>,
    /// Gap when the run stopped (at the swap, or after `m` balls).
    pub final_gap: i64,
    /// Gap after every step, recorded on request; the run continues past a
    /// swap when recording.
    pub path: Option<Vec<i64>>,
}

/// Runs GREEDY and watches the load gap between the two tracked bins.
///
/// Without path recording the run stops at the first swap.
pub fn gambler_trial(spec: &GamblerSpec) -> Result<GamblerOutcome> {
    let mut state = spec.initial_state()?;
    let mut engine = RunSpec::new(PolicyKind::Greedy, spec.n, spec.d, spec.seed).engine(spec.m)?;
    let mut gap = spec.gap0 as i64;
    let mut swap_step = None;
    let mut path = spec
        .record_path
        .then(|| Vec::with_capacity(spec.m as usize));
    for step in 1..=spec.m {
        match engine.step(&mut state)? {
            LARGER => gap += 1,
            SMALLER => {
                gap -= 1;
                if gap < 0 && swap_step.is_none() {
                    swap_step = Some(step);
                }
            }
            _ => {}
        }
        match &mut path {
            Some(p) => p.push(gap),
            None if swap_step.is_some() => break,
            None => {}
        }
    }
    Ok(GamblerOutcome {
        swapped: swap_step.is_some(),
        swap_step,
        final_gap: gap,
        path,
    })
}

/// `⌈δn/(d−1)⌉`: the starting gap that makes the swap bound `e^{−δ}`.
pub fn gap_for_delta(delta: f64, n: usize, d: usize) -> Result<u64> {
    if d < 2 {
        return Err(Error::invalid("d", "gap from delta needs d >= 2"));
    }
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::invalid(
            "delta",
            format!("must be non-negative, got {delta}"),
        ));
    }
    Ok((delta * n as f64 / (d - 1) as f64 - 1e-9).ceil().max(0.0) as u64)
}
