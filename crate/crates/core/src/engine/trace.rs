use crate::engine::state::OptionSet;

/// Per-step log of a run, stored column-wise.
///
/// Step `k` (1-based) sampled `options[(k-1)*width .. k*width]`. UNIFORM
/// traces have width 1 and record the chosen bin as the sole option.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    width: usize,
    options: Vec<usize>,
    chosen: Vec<usize>,
    tie_cardinality: Vec<u32>,
}

/// Borrowed view of one trace entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRecord<'a> {
    pub step: u64,
    pub options: &'a [usize],
    pub chosen: usize,
    pub tie_occurred: bool,
    pub tie_cardinality: u32,
}

impl Trace {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            ..Self::default()
        }
    }

    pub fn with_capacity(width: usize, steps: usize) -> Self {
        Self {
            width,
            options: Vec::with_capacity(width * steps),
            chosen: Vec::with_capacity(steps),
            tie_cardinality: Vec::with_capacity(steps),
        }
    }

    pub(crate) fn push(&mut self, options: &[usize], chosen: usize, tie_cardinality: u32) {
        debug_assert_eq!(options.len(), self.width);
        self.options.extend_from_slice(options);
        self.chosen.push(chosen);
        self.tie_cardinality.push(tie_cardinality);
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<TraceRecord<'_>> {
        let chosen = *self.chosen.get(index)?;
        let card = self.tie_cardinality[index];
        Some(TraceRecord {
            step: index as u64 + 1,
            options: &self.options[index * self.width..(index + 1) * self.width],
            chosen,
            tie_occurred: card > 1,
            tie_cardinality: card,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = TraceRecord<'_>> + '_ {
        (0..self.len()).map(move |i| self.get(i).expect("index in range"))
    }

    /// The recorded option sets, in step order.
    pub fn option_sets(&self) -> Vec<OptionSet> {
        self.options
            .chunks_exact(self.width.max(1))
            .map(|c| OptionSet::new(c.to_vec()))
            .collect()
    }
}
