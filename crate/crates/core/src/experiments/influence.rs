use std::collections::BTreeSet;

use crate::engine::OptionSet;

/// Bins whose outcome may differ between two runs that differ only by one
/// initial ball in bin `i` versus bin `j`.
///
/// `T_0 = {i, j}` and `T_t = T_{t-1} ∪ S_t` whenever `S_t` meets `T_{t-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfluenceSet {
    pub pair: (usize, usize),
    pub members: BTreeSet<usize>,
    pub log: Vec<InfluenceStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfluenceStep {
    /// 1-based step.
    pub step: u64,
    /// Bins that joined at this step, in option order.
    pub joined: Vec<usize>,
    /// The option set held `i` or `j` together with another bin already in
    /// `T_{t-1}`: only such steps can reverse the effect of the extra ball.
    pub critical: bool,
}

impl InfluenceSet {
    pub fn new(i: usize, j: usize) -> Self {
        Self {
            pair: (i, j),
            members: BTreeSet::from([i, j]),
            log: Vec::new(),
        }
    }

    /// Applies one option set.
    pub fn absorb(&mut self, options: &[usize]) {
        let (i, j) = self.pair;
        let touches = options.iter().any(|o| self.members.contains(o));
        let critical = [i, j].iter().any(|&seed| {
            options.contains(&seed)
                && options
                    .iter()
                    .any(|&o| o != seed && self.members.contains(&o))
        });
        let mut joined = Vec::new();
        if touches {
            for &o in options {
                if self.members.insert(o) {
                    joined.push(o);
                }
            }
        }
        self.log.push(InfluenceStep {
            step: self.log.len() as u64 + 1,
            joined,
            critical,
        });
    }

    pub fn contains(&self, bin: usize) -> bool {
        self.members.contains(&bin)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// No step was critical, so the run from `b + e_i` keeps `B_i` strictly
    /// above the run from `b + e_j`.
    pub fn certifies_no_chain(&self) -> bool {
        !self.log.iter().any(|s| s.critical)
    }
}

/// Evolves `T_t` over `option_sets` starting from `T_0 = {i, j}`.
pub fn influence_set_evolve(t0: (usize, usize), option_sets: &[OptionSet]) -> InfluenceSet {
    let mut set = InfluenceSet::new(t0.0, t0.1);
    for s in option_sets {
        set.absorb(&s.choices);
    }
    set
}
