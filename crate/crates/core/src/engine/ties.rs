use crate::engine::rng::TieStream;
use crate::engine::state::TieWeight;
use crate::error::{Error, Result};

/// Scripted tie outcomes: entry `k` names the bin that wins the `k`-th tie
/// of a run. Once exhausted, ties fall back to the tie stream.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TieScript {
    winners: Vec<usize>,
}

impl TieScript {
    pub fn new(winners: Vec<usize>) -> Self {
        Self { winners }
    }

    pub fn from_one_based(labels: &[usize]) -> Result<Self> {
        labels
            .iter()
            .map(|&l| {
                l.checked_sub(1)
                    .ok_or_else(|| Error::config("tie script labels are 1-based; got 0"))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn winners(&self) -> &[usize] {
        &self.winners
    }
}

/// Outcome of one placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub bin: usize,
    /// Number of distinct bins that attained the extreme load.
    pub tie_cardinality: u32,
}

/// Tie resolution for one run: stream, optional script and weighting mode.
///
/// Keeps the run-relative step counter; step `k` resolves its tie with
/// `TieStream::pick(k, ..)`.
#[derive(Debug, Clone)]
pub struct TieBreaker {
    stream: TieStream,
    script: Option<TieScript>,
    script_pos: usize,
    weight: TieWeight,
    step: u64,
    ties_seen: u64,
    scratch: Vec<usize>,
}

impl TieBreaker {
    pub fn new(stream: TieStream) -> Self {
        Self {
            stream,
            script: None,
            script_pos: 0,
            weight: TieWeight::PerBin,
            step: 0,
            ties_seen: 0,
            scratch: Vec::new(),
        }
    }

    pub fn with_script(mut self, script: Option<TieScript>) -> Self {
        self.script = script;
        self.script_pos = 0;
        self
    }

    pub fn with_weight(mut self, weight: TieWeight) -> Self {
        self.weight = weight;
        self
    }

    pub fn weight(&self) -> TieWeight {
        self.weight
    }

    /// Steps started so far.
    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn ties_seen(&self) -> u64 {
        self.ties_seen
    }

    #[inline]
    pub(crate) fn begin_step(&mut self) {
        self.step += 1;
    }

    /// Picks the bin receiving the ball among `options`, where `better(a, b)`
    /// means load `a` is strictly preferred to load `b`.
    #[inline]
    pub(crate) fn choose<F>(
        &mut self,
        loads: &[u64],
        options: &[usize],
        better: F,
    ) -> Result<Placement>
    where
        F: Fn(u64, u64) -> bool,
    {
        match options {
            [] => Err(Error::config("empty option set")),
            [only] => Ok(Placement {
                bin: *only,
                tie_cardinality: 1,
            }),
            [a, b] => {
                let (a, b) = (*a, *b);
                let (la, lb) = (loads[a], loads[b]);
                if la != lb || a == b {
                    // branch-free select: the comparison is a coin flip early on
                    let bin = if better(la, lb) { a } else { b };
                    Ok(Placement {
                        bin,
                        tie_cardinality: 1,
                    })
                } else {
                    let mut cands = std::mem::take(&mut self.scratch);
                    cands.clear();
                    cands.extend_from_slice(&[a, b]);
                    let r = self.resolve(&cands, 2);
                    self.scratch = cands;
                    r
                }
            }
            _ => {
                let mut best = loads[options[0]];
                for &o in &options[1..] {
                    if better(loads[o], best) {
                        best = loads[o];
                    }
                }
                let mut cands = std::mem::take(&mut self.scratch);
                cands.clear();
                let mut distinct = 0u32;
                for (slot, &o) in options.iter().enumerate() {
                    if loads[o] != best {
                        continue;
                    }
                    let first = !options[..slot].contains(&o);
                    if first {
                        distinct += 1;
                    }
                    if first || self.weight == TieWeight::PerSlot {
                        cands.push(o);
                    }
                }
                let r = if distinct == 1 {
                    Ok(Placement {
                        bin: cands[0],
                        tie_cardinality: 1,
                    })
                } else {
                    self.resolve(&cands, distinct)
                };
                self.scratch = cands;
                r
            }
        }
    }

    fn resolve(&mut self, candidates: &[usize], distinct: u32) -> Result<Placement> {
        self.ties_seen += 1;
        if let Some(script) = &self.script {
            if let Some(&winner) = script.winners.get(self.script_pos) {
                self.script_pos += 1;
                if !candidates.contains(&winner) {
                    let labels: Vec<String> =
                        candidates.iter().map(|c| (c + 1).to_string()).collect();
                    return Err(Error::config(format!(
                        "scripted tie winner {} at step {} is not among the tied bins {{{}}}",
                        winner + 1,
                        self.step,
                        labels.join(",")
                    )));
                }
                return Ok(Placement {
                    bin: winner,
                    tie_cardinality: distinct,
                });
            }
        }
        let k = self.stream.pick(self.step, candidates.len());
        Ok(Placement {
            bin: candidates[k],
            tie_cardinality: distinct,
        })
    }
}
