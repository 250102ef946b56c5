//! Order statistics of a load vector.
//!
//! Ranked order is non-increasing load with ties broken by original index.
//! Every observable here depends only on the multiset of loads, so this
//! deterministic tie order gives the same values as a random relabeling.

use std::collections::BTreeMap;

use statrs::function::gamma::ln_gamma;

use crate::engine::AllocationState;
use crate::error::{Error, Result};

/// Loads in ranked order together with the labeling and level counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedView {
    /// Loads sorted non-increasing.
    pub ranked_loads: Vec<u64>,
    /// `label_map[r]` is the original (0-based) index of the bin at rank `r`.
    pub label_map: Vec<usize>,
    /// Distinct load values in decreasing order.
    pub levels: Vec<Level>,
}

/// A block of equally loaded bins in ranked order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Level {
    pub load: u64,
    pub count: usize,
    /// Rank of the first bin of the block (number of strictly larger bins).
    pub start: usize,
}

pub fn ranked_view(state: &AllocationState) -> RankedView {
    let loads = state.loads();
    let mut label_map: Vec<usize> = (0..loads.len()).collect();
    label_map.sort_by(|&a, &b| loads[b].cmp(&loads[a]).then(a.cmp(&b)));
    let ranked_loads: Vec<u64> = label_map.iter().map(|&i| loads[i]).collect();
    let mut levels: Vec<Level> = Vec::new();
    for (rank, &load) in ranked_loads.iter().enumerate() {
        match levels.last_mut() {
            Some(level) if level.load == load => level.count += 1,
            _ => levels.push(Level {
                load,
                count: 1,
                start: rank,
            }),
        }
    }
    RankedView {
        ranked_loads,
        label_map,
        levels,
    }
}

/// `⌈x·n⌉`, tolerant of floating-point noise in `x·n`.
pub fn subset_size(x: f64, n: usize) -> usize {
    let xn = x * n as f64;
    let k = (xn - 1e-12 * xn.max(1.0)).ceil();
    (k.max(0.0) as usize).min(n)
}

fn check_fraction(name: &'static str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::invalid(name, format!("{v} is outside [0, 1]")));
    }
    Ok(())
}

/// Ascending loads with prefix sums, for repeated subset queries on one
/// snapshot.
#[derive(Debug, Clone)]
pub struct LoadProfile {
    ascending: Vec<u64>,
    prefix: Vec<u64>,
}

impl LoadProfile {
    pub fn new(state: &AllocationState) -> Self {
        let mut ascending = state.loads().to_vec();
        ascending.sort_unstable();
        let mut prefix = Vec::with_capacity(ascending.len() + 1);
        prefix.push(0);
        let mut acc = 0u64;
        for &l in &ascending {
            acc += l;
            prefix.push(acc);
        }
        Self { ascending, prefix }
    }

    pub fn n(&self) -> usize {
        self.ascending.len()
    }

    pub fn total(&self) -> u64 {
        *self.prefix.last().unwrap_or(&0)
    }

    /// Balls in the `k` least loaded bins.
    pub fn least_k(&self, k: usize) -> u64 {
        self.prefix[k.min(self.n())]
    }

    pub fn least_subset_load(&self, x: f64) -> Result<u64> {
        check_fraction("x", x)?;
        Ok(self.least_k(subset_size(x, self.n())))
    }

    pub fn least_fraction_for_share(&self, y: f64) -> Result<f64> {
        check_fraction("y", y)?;
        let n = self.n();
        if n == 0 {
            return Ok(0.0);
        }
        let target = y * self.total() as f64;
        // prefix is non-decreasing: first k with prefix[k] >= target
        let k = self.prefix.partition_point(|&p| (p as f64) < target);
        Ok(k.min(n) as f64 / n as f64)
    }

    pub fn ascending(&self) -> &[u64] {
        &self.ascending
    }
}

/// Balls held by the `⌈x·n⌉` least loaded bins.
pub fn least_subset_load(state: &AllocationState, x: f64) -> Result<u64> {
    LoadProfile::new(state).least_subset_load(x)
}

/// Smallest `x = k/n` whose `k` least loaded bins hold at least `y·t` balls.
pub fn least_fraction_for_share(state: &AllocationState, y: f64) -> Result<f64> {
    LoadProfile::new(state).least_fraction_for_share(y)
}

/// Number of bins at each load value.
pub fn load_histogram(state: &AllocationState) -> BTreeMap<u64, u64> {
    let mut h = BTreeMap::new();
    for &l in state.loads() {
        *h.entry(l).or_insert(0) += 1;
    }
    h
}

/// Histogram as a dense vector indexed by load, `0..=max_load`.
pub fn dense_histogram(state: &AllocationState) -> Vec<u64> {
    let mut h = vec![0u64; state.max_load() as usize + 1];
    for &l in state.loads() {
        h[l as usize] += 1;
    }
    h
}

/// Poisson(`m/n`) mass at `k`: the expected fraction of bins with load `k`
/// under UNIFORM.
pub fn uniform_load_fraction(k: u64, m: u64, n: u64) -> f64 {
    let lambda = m as f64 / n as f64;
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let k = k as f64;
    (k * lambda.ln() - lambda - ln_gamma(k + 1.0)).exp()
}

/// Expected fraction of least loaded bins holding a `y` share of the balls
/// under UNIFORM with `c = m/n` balls per bin, filling whole load levels in
/// increasing order and the last level fractionally.
pub fn uniform_least_fraction(y: f64, c: f64) -> Result<f64> {
    check_fraction("y", y)?;
    if y == 0.0 || c == 0.0 {
        return Ok(0.0);
    }
    // empty bins come first
    let mut x = (-c).exp();
    let mut share = 0.0;
    let mut k = 1u64;
    let lambda_ln = c.ln();
    loop {
        let mass = (k as f64 * lambda_ln - c - ln_gamma(k as f64 + 1.0)).exp();
        let balls = k as f64 * mass / c;
        if share + balls >= y || mass < 1e-300 {
            let need = (y - share).max(0.0);
            return Ok((x + need * c / k as f64).min(1.0));
        }
        share += balls;
        x += mass;
        k += 1;
    }
}

/// Lengths of maximal runs of equal loads in ranked order.
pub fn equal_run_lengths(state: &AllocationState) -> Vec<usize> {
    ranked_view(state).levels.iter().map(|l| l.count).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EqualPairStats {
    /// Pairs of retained bins with equal loads.
    pub pair_count: u64,
    /// Largest number of retained bins sharing one load.
    pub max_multiplicity: u64,
    /// Bins left after excluding the smallest `⌈δn⌉`.
    pub retained: u64,
}

impl EqualPairStats {
    /// `pair_count` over all retained pairs.
    pub fn pair_fraction(&self) -> f64 {
        let pairs = self.retained * self.retained.saturating_sub(1) / 2;
        if pairs == 0 {
            0.0
        } else {
            self.pair_count as f64 / pairs as f64
        }
    }
}

/// Equal-load pair count and largest equal-load group among bins outside
/// the smallest `⌈δn⌉`.
pub fn equal_pair_stats(state: &AllocationState, delta: f64) -> Result<EqualPairStats> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::invalid(
            "delta",
            format!("{delta} is outside [0, 1)"),
        ));
    }
    let mut ascending = state.loads().to_vec();
    ascending.sort_unstable();
    let skip = subset_size(delta, ascending.len());
    let kept = &ascending[skip..];
    let mut pair_count = 0u64;
    let mut max_multiplicity = 0u64;
    for group in kept.chunk_by(|a, b| a == b) {
        let c = group.len() as u64;
        pair_count += c * (c - 1) / 2;
        max_multiplicity = max_multiplicity.max(c);
    }
    Ok(EqualPairStats {
        pair_count,
        max_multiplicity,
        retained: kept.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(loads: &[u64]) -> AllocationState {
        AllocationState::from_loads(loads.to_vec())
    }

    #[test]
    fn ranked_view_example() {
        let v = ranked_view(&st(&[1, 3, 3, 0]));
        assert_eq!(v.ranked_loads, vec![3, 3, 1, 0]);
        let one_based: Vec<usize> = v.label_map.iter().map(|i| i + 1).collect();
        assert_eq!(one_based, vec![2, 3, 1, 4]);
        assert_eq!(v.levels.iter().map(|l| l.count).sum::<usize>(), 4);
        assert_eq!(
            v.levels[1],
            Level {
                load: 1,
                count: 1,
                start: 2
            }
        );
    }

    #[test]
    fn ranked_view_all_equal_is_identity() {
        let v = ranked_view(&st(&[4, 4, 4]));
        assert_eq!(v.ranked_loads, vec![4, 4, 4]);
        assert_eq!(v.label_map, vec![0, 1, 2]);
    }

    #[test]
    fn least_subset_edges() {
        let s = st(&[5, 0, 2, 1]);
        assert_eq!(least_subset_load(&s, 1.0).unwrap(), 8);
        assert_eq!(least_subset_load(&s, 0.0).unwrap(), 0);
        assert_eq!(least_subset_load(&s, 0.5).unwrap(), 1);
        // ceil(0.3 * 4) = 2
        assert_eq!(least_subset_load(&s, 0.3).unwrap(), 1);
        assert_eq!(least_subset_load(&s, 0.26).unwrap(), 1);
        assert!(least_subset_load(&s, 1.5).is_err());
    }

    #[test]
    fn subset_size_rounds_up_exactly() {
        assert_eq!(subset_size(0.1, 10_000), 1000);
        assert_eq!(subset_size(1.0 / 3.0, 3), 1);
        assert_eq!(subset_size(0.0001, 10_000), 1);
        assert_eq!(subset_size(0.5, 5), 3);
    }

    #[test]
    fn least_fraction_edges() {
        let s = st(&[5, 0, 2, 1]);
        assert_eq!(least_fraction_for_share(&s, 0.0).unwrap(), 0.0);
        assert_eq!(least_fraction_for_share(&s, 1.0).unwrap(), 1.0);
        // prefixes 0,0,1,3,8 ; 3/8 share needs 3 bins
        assert_eq!(least_fraction_for_share(&s, 3.0 / 8.0).unwrap(), 0.75);
    }

    #[test]
    fn histogram_small() {
        assert_eq!(
            load_histogram(&AllocationState::new(7)),
            BTreeMap::from([(0, 7)])
        );
        assert_eq!(
            load_histogram(&st(&[2, 2, 0])),
            BTreeMap::from([(0, 1), (2, 2)])
        );
        assert_eq!(dense_histogram(&st(&[2, 2, 0])), vec![1, 0, 2]);
    }

    #[test]
    fn poisson_masses() {
        let e = std::f64::consts::E;
        assert!((uniform_load_fraction(0, 10, 10) - 1.0 / e).abs() < 1e-15);
        assert!((uniform_load_fraction(2, 10, 10) - 1.0 / (2.0 * e)).abs() < 1e-15);
        let total: f64 = (0..=50).map(|k| uniform_load_fraction(k, 7, 7)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(uniform_load_fraction(0, 0, 5), 1.0);
    }

    #[test]
    fn uniform_table_column() {
        let e = std::f64::consts::E;
        // two empty/one-ball levels, then half of the load-2 level
        let half = 2.0 / e + (0.5 - 1.0 / e) / 2.0;
        assert!((uniform_least_fraction(0.5, 1.0).unwrap() - half).abs() < 1e-12);
        for (y, x) in [(1.0 / 3.0, 0.7), (0.5, 0.8), (2.0 / 3.0, 0.88)] {
            assert!((uniform_least_fraction(y, 1.0).unwrap() - x).abs() < 0.01);
        }
        assert_eq!(uniform_least_fraction(0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn equal_runs() {
        assert_eq!(equal_run_lengths(&st(&[2, 2, 2, 1, 1, 0])), vec![3, 2, 1]);
        assert_eq!(equal_run_lengths(&st(&[3, 1, 2])), vec![1, 1, 1]);
        assert_eq!(equal_run_lengths(&st(&[4; 5])), vec![5]);
    }

    #[test]
    fn equal_pairs() {
        let s = st(&[2, 2, 2, 1, 1, 0]);
        let p = equal_pair_stats(&s, 0.0).unwrap();
        assert_eq!((p.pair_count, p.max_multiplicity), (4, 3));

        let distinct = st(&[5, 1, 3, 0]);
        let p = equal_pair_stats(&distinct, 0.0).unwrap();
        assert_eq!((p.pair_count, p.max_multiplicity), (0, 1));

        let n = 6;
        let p = equal_pair_stats(&s, 1.0 - 1.0 / n as f64).unwrap();
        assert_eq!((p.pair_count, p.max_multiplicity, p.retained), (0, 1, 1));
        assert!(equal_pair_stats(&s, 1.0).is_err());
    }
}
