use serde::{Deserialize, Serialize};

use crate::engine::rng::mix64;
use crate::engine::{AllocationState, OptionSet, PolicyKind, RngStreams, RunSpec, TieScript};
use crate::error::{Error, Result};
use crate::experiments::influence::InfluenceSet;

/// How the two runs of a paradox trial resolve their ties.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieCoupling {
    /// Both runs draw tie randomness keyed by (seed, step): identical
    /// candidate lists at the same step resolve identically.
    #[default]
    Shared,
    /// The second run uses an unrelated tie key.
    Independent,
}

impl std::str::FromStr for TieCoupling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "shared" | "coupled" => Ok(Self::Shared),
            "independent" => Ok(Self::Independent),
            other => Err(Error::config(format!(
                "unknown tie coupling `{other}` (expected shared or independent)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParadoxSpec {
    pub base: AllocationState,
    /// 0-based bins.
    pub i: usize,
    pub j: usize,
    pub m: u64,
    pub d: usize,
    pub seed: u64,
    pub coupling: TieCoupling,
    /// Tie winners for the runs from `b + e_i` and `b + e_j`.
    pub tie_scripts: Option<(TieScript, TieScript)>,
    /// Replaces the random option stream for both runs.
    pub options: Option<Vec<OptionSet>>,
}

impl ParadoxSpec {
    pub fn new(base: AllocationState, i: usize, j: usize, m: u64, d: usize, seed: u64) -> Self {
        Self {
            base,
            i,
            j,
            m,
            d,
            seed,
            coupling: TieCoupling::Shared,
            tie_scripts: None,
            options: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParadoxOutcome {
    /// Final load of `B_i` starting from `b + e_i`.
    pub load_from_ei: u64,
    /// Final load of `B_i` starting from `b + e_j`.
    pub load_from_ej: u64,
    /// The extra ball in `B_i` failed to leave `B_i` strictly fuller.
    pub paradox: bool,
    pub influence: InfluenceSet,
    pub final_from_ei: AllocationState,
    pub final_from_ej: AllocationState,
}

/// Runs GREEDY from `b + e_i` and `b + e_j` over one shared option stream.
pub fn paradox_trial(spec: &ParadoxSpec) -> Result<ParadoxOutcome> {
    let n = spec.base.n();
    let (i, j) = (spec.i, spec.j);
    if i == j {
        return Err(Error::invalid("i, j", "bins must differ"));
    }
    let start_i = spec.base.with_extra_ball(i)?;
    let start_j = spec.base.with_extra_ball(j)?;
    let (script_i, script_j) = match &spec.tie_scripts {
        Some((a, b)) => (Some(a.clone()), Some(b.clone())),
        None => (None, None),
    };
    let shared_key = RngStreams::from_seed(spec.seed).ties.key();
    let key_j = match spec.coupling {
        TieCoupling::Shared => shared_key,
        TieCoupling::Independent => mix64(shared_key ^ 0xA5A5_5A5A_C3C3_3C3C),
    };
    let spec_for = |script, key| {
        RunSpec::new(PolicyKind::Greedy, n, spec.d, spec.seed)
            .scripted_options(spec.options.clone())
            .tie_script(script)
            .tie_key(Some(key))
    };
    let mut run_i = spec_for(script_i, shared_key).engine(spec.m)?;
    let mut run_j = spec_for(script_j, key_j).engine(spec.m)?;

    let mut state_i = start_i;
    let mut state_j = start_j;
    let mut influence = InfluenceSet::new(i, j);
    for _ in 0..spec.m {
        run_i.step(&mut state_i)?;
        run_j.step(&mut state_j)?;
        debug_assert_eq!(run_i.last_options(), run_j.last_options());
        influence.absorb(run_i.last_options());
    }
    let load_from_ei = state_i.load(i);
    let load_from_ej = state_j.load(i);
    Ok(ParadoxOutcome {
        load_from_ei,
        load_from_ej,
        paradox: load_from_ei <= load_from_ej,
        influence,
        final_from_ei: state_i,
        final_from_ej: state_j,
    })
}
