//! Shared fixtures for the criterion benches.

use greedybins_core::{run, AllocationState, PolicyKind};

/// Problem sizes used across the engine benches.
pub const SIZES: &[usize] = &[1_000, 100_000];

/// A GREEDY state after `c·n` balls, for rank-statistic benches.
pub fn loaded_state(n: usize, c: u64, d: usize, seed: u64) -> AllocationState {
    run(PolicyKind::Greedy, c * n as u64, n, d, seed, false, None)
        .expect("fixture parameters are valid")
        .0
}
