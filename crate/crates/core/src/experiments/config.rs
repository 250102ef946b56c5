//! Flat `key = value` experiment configuration.
//!
//! One assignment per line; `#` starts a comment; lists are comma
//! separated. Bin labels (`i`, `j`, `options`, `tie_script_*`) are 1-based.
//! Option sets in `options` are written `a:b[:c...]`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::engine::{AllocationState, OptionSet, PolicyKind, TieScript, TieWeight};
use crate::error::{Error, Result};
use crate::experiments::paradox::TieCoupling;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Couple,
    Paradox,
    Gambler,
    EqualLoads,
    Histogram,
    SubsetLoad,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Couple => "couple",
            Self::Paradox => "paradox",
            Self::Gambler => "gambler",
            Self::EqualLoads => "equal_loads",
            Self::Histogram => "histogram",
            Self::SubsetLoad => "subset_load",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "couple" => Self::Couple,
            "paradox" => Self::Paradox,
            "gambler" => Self::Gambler,
            "equal_loads" => Self::EqualLoads,
            "histogram" => Self::Histogram,
            "subset_load" => Self::SubsetLoad,
            other => {
                return Err(Error::config(format!(
                    "unknown experiment kind `{other}` (expected couple, paradox, gambler, \
                     equal_loads, histogram or subset_load)"
                )))
            }
        })
    }
}

/// Every recognised key, in canonical order.
pub const KEYS: &[&str] = &[
    "kind",
    "policy",
    "m",
    "n",
    "d",
    "x",
    "y",
    "delta",
    "gap",
    "excluded",
    "eps",
    "snapshots",
    "replications",
    "seed",
    "output",
    "i",
    "j",
    "base",
    "options",
    "tie_script_i",
    "tie_script_j",
    "tie_coupling",
    "tie_weight",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub policy: PolicyKind,
    pub m: u64,
    pub n: usize,
    pub d: usize,
    /// Bin fractions for `subset_load`.
    pub x: Vec<f64>,
    /// Ball fractions for `subset_load`.
    pub y: Vec<f64>,
    /// Gambler: sets the starting gap to `⌈δn/(d−1)⌉`.
    pub delta: Option<f64>,
    /// Gambler: explicit starting gap.
    pub gap: Option<u64>,
    /// `equal_loads`: fraction of extreme bins left out at each end.
    pub excluded: f64,
    /// `couple`: slack in the max-load threshold.
    pub eps: Option<f64>,
    /// Extra times at which `histogram` records statistics.
    pub snapshots: Vec<u64>,
    pub replications: usize,
    pub seed: u64,
    /// Output directory hint for front ends.
    pub output: Option<String>,
    /// 1-based tracked bins for `paradox`.
    pub i: usize,
    pub j: usize,
    pub base: Option<Vec<u64>>,
    /// 1-based scripted option sets.
    pub options: Option<Vec<Vec<usize>>>,
    pub tie_script_i: Option<Vec<usize>>,
    pub tie_script_j: Option<Vec<usize>>,
    pub tie_coupling: TieCoupling,
    pub tie_weight: TieWeight,
}

impl ExperimentConfig {
    /// A config with defaults for every optional key.
    pub fn new(kind: ExperimentKind, m: u64, n: usize) -> Self {
        Self {
            kind,
            policy: PolicyKind::Greedy,
            m,
            n,
            d: 2,
            x: Vec::new(),
            y: Vec::new(),
            delta: None,
            gap: None,
            excluded: 0.0,
            eps: None,
            snapshots: Vec::new(),
            replications: 1,
            seed: 0,
            output: None,
            i: 1,
            j: 2,
            base: None,
            options: None,
            tie_script_i: None,
            tie_script_j: None,
            tie_coupling: TieCoupling::Shared,
            tie_weight: TieWeight::PerBin,
        }
    }

    /// Parses the line-oriented format and validates the result.
    pub fn parse(text: &str) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(Error::config(format!(
                    "line {}: unknown key `{key}`",
                    lineno + 1
                )));
            }
            if !seen.insert(key.to_string()) {
                return Err(Error::config(format!(
                    "line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
            if value.is_empty() {
                return Err(Error::config(format!(
                    "line {}: empty value for `{key}`",
                    lineno + 1
                )));
            }
            pairs.push((lineno + 1, key, value));
        }
        for required in ["kind", "m", "n"] {
            if !seen.contains(required) {
                return Err(Error::config(format!("missing required key `{required}`")));
            }
        }

        let mut cfg = Self::new(ExperimentKind::Histogram, 0, 0);
        for (lineno, key, value) in pairs {
            cfg.assign(key, value)
                .map_err(|e| Error::config(format!("line {lineno}: `{key}`: {}", strip(e))))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn assign(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "kind" => self.kind = v.parse()?,
            "policy" => self.policy = v.parse()?,
            "m" => self.m = count(v)?,
            "n" => self.n = count(v)? as usize,
            "d" => self.d = count(v)? as usize,
            "x" => self.x = list(v, real)?,
            "y" => self.y = list(v, real)?,
            "delta" => self.delta = Some(real(v)?),
            "gap" => self.gap = Some(count(v)?),
            "excluded" => self.excluded = real(v)?,
            "eps" => self.eps = Some(real(v)?),
            "snapshots" => self.snapshots = list(v, count)?,
            "replications" => self.replications = count(v)? as usize,
            "seed" => self.seed = count(v)?,
            "output" => self.output = Some(v.to_string()),
            "i" => self.i = count(v)? as usize,
            "j" => self.j = count(v)? as usize,
            "base" => self.base = Some(list(v, count)?),
            "options" => {
                self.options = Some(list(v, |s| {
                    s.split(':').map(|p| count(p).map(|c| c as usize)).collect()
                })?)
            }
            "tie_script_i" => self.tie_script_i = Some(list(v, |s| count(s).map(|c| c as usize))?),
            "tie_script_j" => self.tie_script_j = Some(list(v, |s| count(s).map(|c| c as usize))?),
            "tie_coupling" => self.tie_coupling = v.parse()?,
            "tie_weight" => self.tie_weight = v.parse()?,
            _ => unreachable!("keys are checked against KEYS"),
        }
        Ok(())
    }

    /// Checks kind-specific requirements.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::config(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.d == 0 {
            return bad("d must be at least 1".into());
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        match self.kind {
            ExperimentKind::Couple => {
                if let Some(eps) = self.eps {
                    if !(eps > 0.0) {
                        return bad(format!("eps must be positive, got {eps}"));
                    }
                }
            }
            ExperimentKind::Paradox => {
                for (name, v) in [("i", self.i), ("j", self.j)] {
                    if v == 0 || v > self.n {
                        return bad(format!("{name} = {v} is not a bin label in 1..={}", self.n));
                    }
                }
                if self.i == self.j {
                    return bad("i and j must differ".into());
                }
                if let Some(b) = &self.base {
                    if b.len() != self.n {
                        return bad(format!("base has {} loads, n = {}", b.len(), self.n));
                    }
                }
                if self.tie_script_i.is_some() != self.tie_script_j.is_some() {
                    return bad("tie_script_i and tie_script_j must be given together".into());
                }
                if let Some(sets) = &self.options {
                    if (sets.len() as u64) < self.m {
                        return bad(format!("{} option sets for m = {}", sets.len(), self.m));
                    }
                    if let Some(s) = sets.iter().find(|s| s.len() != self.d) {
                        return bad(format!(
                            "option set {:?} does not have d = {} entries",
                            s, self.d
                        ));
                    }
                }
            }
            ExperimentKind::Gambler => {
                if self.n < 2 {
                    return bad("gambler needs n >= 2".into());
                }
                match (self.gap, self.delta) {
                    (Some(_), Some(_)) => return bad("give either gap or delta, not both".into()),
                    (None, None) => return bad("gambler needs gap or delta".into()),
                    (None, Some(_)) if self.d < 2 => {
                        return bad("delta needs d >= 2; use gap instead".into())
                    }
                    _ => {}
                }
                if let Some(b) = &self.base {
                    if b.len() != self.n {
                        return bad(format!("base has {} loads, n = {}", b.len(), self.n));
                    }
                }
            }
            ExperimentKind::EqualLoads => {
                if !(0.0..1.0).contains(&self.excluded) {
                    return bad(format!("excluded must be in [0, 1), got {}", self.excluded));
                }
            }
            ExperimentKind::Histogram => {
                if let Some(&t) = self.snapshots.iter().find(|&&t| t > self.m) {
                    return bad(format!("snapshot {t} is past m = {}", self.m));
                }
            }
            ExperimentKind::SubsetLoad => {
                if self.x.is_empty() && self.y.is_empty() {
                    return bad("subset_load needs x or y values".into());
                }
                if let Some(v) = self
                    .x
                    .iter()
                    .chain(&self.y)
                    .find(|v| !(0.0..=1.0).contains(*v))
                {
                    return bad(format!("fractions must lie in [0, 1], got {v}"));
                }
            }
        }
        Ok(())
    }

    pub fn base_state(&self) -> AllocationState {
        match &self.base {
            Some(b) => AllocationState::from_loads(b.clone()),
            None => AllocationState::new(self.n),
        }
    }

    pub fn option_sets(&self) -> Result<Option<Vec<OptionSet>>> {
        self.options
            .as_ref()
            .map(|sets| sets.iter().map(|s| OptionSet::from_one_based(s)).collect())
            .transpose()
    }

    pub fn tie_scripts(&self) -> Result<Option<(TieScript, TieScript)>> {
        match (&self.tie_script_i, &self.tie_script_j) {
            (Some(a), Some(b)) => Ok(Some((
                TieScript::from_one_based(a)?,
                TieScript::from_one_based(b)?,
            ))),
            _ => Ok(None),
        }
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Config(msg) => msg,
        other => other.to_string(),
    }
}

/// Non-negative integer; accepts plain digits or an integral float such as `1e6`.
fn count(s: &str) -> Result<u64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 => Ok(v as u64),
        _ => Err(Error::config(format!(
            "`{s}` is not a non-negative integer"
        ))),
    }
}

fn real(s: &str) -> Result<f64> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => real(a)? / real(b)?,
        None => s
            .parse::<f64>()
            .map_err(|_| Error::config(format!("`{s}` is not a number")))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(format!("`{s}` is not finite")))
    }
}

fn list<T>(s: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    s.split(',').map(|p| item(p.trim())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_paradox_script() {
        let cfg = ExperimentConfig::parse(
            "# scripted table column pair\n\
             kind = paradox\n\
             n = 3\n\
             m = 4\n\
             base = 1,1,1\n\
             i = 2\n\
             j = 1\n\
             options = 1:3, 1:3, 2:3, 2:3\n\
             tie_script_i = 3\n\
             tie_script_j = 2   # trailing comment\n",
        )
        .unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Paradox);
        assert_eq!(cfg.options.as_ref().unwrap()[2], vec![2, 3]);
        assert_eq!(cfg.option_sets().unwrap().unwrap()[0].choices, vec![0, 2]);
        assert_eq!(cfg.tie_scripts().unwrap().unwrap().0.winners(), &[2]);
    }

    #[test]
    fn unknown_key_is_named() {
        let err =
            ExperimentConfig::parse("kind = histogram\nn = 5\nm = 5\nbins = 4\n").unwrap_err();
        assert!(err.to_string().contains("`bins`"), "{err}");
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "kind = histogram\nn = 5\n",
            "kind = histogram\nn = 5\nm = 5\nm = 6\n",
            "kind = histogram\nn = 5\nm = -1\n",
            "kind = shuffle\nn = 5\nm = 5\n",
            "kind = gambler\nn = 5\nm = 5\n",
            "kind = gambler\nn = 5\nm = 5\ngap = 2\ndelta = 1\n",
            "kind = paradox\nn = 5\nm = 5\ni = 3\nj = 3\n",
            "kind = subset_load\nn = 5\nm = 5\n",
            "kind = equal_loads\nn = 5\nm = 5\nexcluded = 1\n",
            "kind = histogram\nn = 5\nm = 5\nsnapshots = 6\n",
            "kind histogram\n",
        ] {
            assert!(ExperimentConfig::parse(text).is_err(), "{text}");
        }
    }

    #[test]
    fn numeric_forms() {
        let cfg =
            ExperimentConfig::parse("kind=subset_load\nn=1e5\nm=100000\ny=1/3,0.5,2/3\n").unwrap();
        assert_eq!(cfg.n, 100_000);
        assert!((cfg.y[0] - 1.0 / 3.0).abs() < 1e-15);
    }
}
