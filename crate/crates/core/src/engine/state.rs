use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bin loads `b_1..b_n` together with the number of balls placed so far.
///
/// `t` always equals the sum of the loads, including balls of an initial
/// configuration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AllocationState {
    loads: Vec<u64>,
    t: u64,
}

impl AllocationState {
    /// `n` empty bins.
    pub fn new(n: usize) -> Self {
        Self {
            loads: vec![0; n],
            t: 0,
        }
    }

    pub fn from_loads(loads: Vec<u64>) -> Self {
        let t = loads.iter().sum();
        Self { loads, t }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.loads.len()
    }

    #[inline]
    pub fn t(&self) -> u64 {
        self.t
    }

    #[inline]
    pub fn loads(&self) -> &[u64] {
        &self.loads
    }

    #[inline]
    pub fn load(&self, bin: usize) -> u64 {
        self.loads[bin]
    }

    pub fn max_load(&self) -> u64 {
        self.loads.iter().copied().max().unwrap_or(0)
    }

    /// Adds one ball to `bin`.
    #[inline]
    pub(crate) fn increment(&mut self, bin: usize) {
        self.loads[bin] += 1;
        self.t += 1;
    }

    /// `self + e_bin`: a copy with one extra ball in `bin`.
    pub fn with_extra_ball(&self, bin: usize) -> Result<Self> {
        if bin >= self.n() {
            return Err(Error::config(format!(
                "bin {} out of range for {} bins",
                bin + 1,
                self.n()
            )));
        }
        let mut next = self.clone();
        next.increment(bin);
        Ok(next)
    }
}

/// The multiset `S_t` of sampled bin indices, in sampling order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OptionSet {
    pub choices: Vec<usize>,
}

impl OptionSet {
    pub fn new(choices: Vec<usize>) -> Self {
        Self { choices }
    }

    /// Builds an option set from 1-based labels.
    pub fn from_one_based(labels: &[usize]) -> Result<Self> {
        labels
            .iter()
            .map(|&l| {
                l.checked_sub(1)
                    .ok_or_else(|| Error::config("bin labels are 1-based; got 0"))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    pub fn contains(&self, bin: usize) -> bool {
        self.choices.contains(&bin)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    /// One uniform bin per ball; `d` is ignored.
    Uniform,
    /// Least loaded of `d` options.
    Fair,
    /// Most loaded of `d` options.
    Greedy,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Uniform => "uniform",
            PolicyKind::Fair => "fair",
            PolicyKind::Greedy => "greedy",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(PolicyKind::Uniform),
            "fair" => Ok(PolicyKind::Fair),
            "greedy" => Ok(PolicyKind::Greedy),
            other => Err(Error::config(format!(
                "unknown policy '{other}' (expected uniform, fair or greedy)"
            ))),
        }
    }
}

/// How a bin that was sampled several times weighs in a tie.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieWeight {
    /// Each distinct extremal bin counts once.
    #[default]
    PerBin,
    /// Each extremal slot of the multiset counts once.
    PerSlot,
}

impl FromStr for TieWeight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-bin" | "bin" => Ok(TieWeight::PerBin),
            "per-slot" | "slot" => Ok(TieWeight::PerSlot),
            other => Err(Error::config(format!(
                "unknown tie weight '{other}' (expected per-bin or per-slot)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_loads_sets_time() {
        let s = AllocationState::from_loads(vec![2, 0, 3]);
        assert_eq!(s.t(), 5);
        assert_eq!(s.max_load(), 3);
        let e = s.with_extra_ball(1).unwrap();
        assert_eq!(e.loads(), &[2, 1, 3]);
        assert_eq!(e.t(), 6);
        assert!(s.with_extra_ball(3).is_err());
    }

    #[test]
    fn policy_round_trip() {
        for p in [PolicyKind::Uniform, PolicyKind::Fair, PolicyKind::Greedy] {
            assert_eq!(p.name().parse::<PolicyKind>().unwrap(), p);
        }
        assert!("polcy".parse::<PolicyKind>().is_err());
    }

    #[test]
    fn one_based_labels() {
        let s = OptionSet::from_one_based(&[1, 3]).unwrap();
        assert_eq!(s.choices, vec![0, 2]);
        assert!(OptionSet::from_one_based(&[0]).is_err());
    }
}
