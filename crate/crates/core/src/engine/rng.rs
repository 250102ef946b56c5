//! Seeded randomness for allocation runs.
//!
//! A single 64-bit seed is expanded with SplitMix64 into five words:
//!
//! * words 1..=4 (little-endian) form the 256-bit ChaCha8 key of the
//!   **option stream**, which runs on ChaCha stream id 0;
//! * word 5 is the **tie key**.
//!
//! Tie-breaking is counter based: the randomness used to resolve a tie at
//! step `t` is a SplitMix64 sequence started at `mix64(tie_key + GOLDEN * t)`.
//! Nothing about ties is stored between steps, so the option stream never
//! depends on how many ties occurred, and two runs sharing a seed resolve a
//! tie over the same candidate list at the same step identically.
//!
//! Both derivations are part of the reproducibility contract and must not
//! change between versions.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// SplitMix64 increment (the 64-bit golden ratio).
pub const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Plain SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(state: u64) -> Self {
        Self { state }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Unbiased draw from `[0, bound)` (Lemire's multiply-shift with rejection).
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let m = (self.next_u64() as u128) * (bound as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }
}

/// Seed for replication `index` of an experiment with base seed `base`:
/// the `(index + 1)`-th output of SplitMix64 started at `base`. Adding
/// replications never changes the seeds of earlier ones.
pub fn replication_seed(base: u64, index: u64) -> u64 {
    mix64(base.wrapping_add(GOLDEN.wrapping_mul(index.wrapping_add(1))))
}

/// Generator for option-set sampling.
#[derive(Debug, Clone)]
pub struct OptionStream {
    rng: ChaCha8Rng,
}

impl OptionStream {
    fn from_key(key: [u8; 32]) -> Self {
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(0);
        Self { rng }
    }

    /// Unbiased bin index in `[0, n)`; consumes one or more 32-bit words.
    #[inline]
    pub fn index(&mut self, n: u32) -> u32 {
        debug_assert!(n > 0);
        let mut m = (self.rng.next_u32() as u64) * (n as u64);
        if (m as u32) < n {
            // the division is only needed on the rare low-word collision
            let threshold = n.wrapping_neg() % n;
            while (m as u32) < threshold {
                m = (self.rng.next_u32() as u64) * (n as u64);
            }
        }
        (m >> 32) as u32
    }
}

/// Counter-based tie randomness.
#[derive(Debug, Clone, Copy)]
pub struct TieStream {
    key: u64,
}

impl TieStream {
    pub fn new(key: u64) -> Self {
        Self { key }
    }

    /// Uniform choice in `[0, count)` for the tie at step `step`.
    #[inline]
    pub fn pick(&self, step: u64, count: usize) -> usize {
        let start = mix64(self.key.wrapping_add(GOLDEN.wrapping_mul(step)));
        SplitMix64::new(start).below(count as u64) as usize
    }

    pub fn key(&self) -> u64 {
        self.key
    }
}

/// The option stream and tie stream of one run.
#[derive(Debug, Clone)]
pub struct RngStreams {
    pub options: OptionStream,
    pub ties: TieStream,
}

impl RngStreams {
    pub fn from_seed(seed: u64) -> Self {
        let mut sm = SplitMix64::new(seed);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&sm.next_u64().to_le_bytes());
        }
        let tie_key = sm.next_u64();
        Self {
            options: OptionStream::from_key(key),
            ties: TieStream::new(tie_key),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // Published SplitMix64 outputs for state 1234567.
        let mut sm = SplitMix64::new(1234567);
        assert_eq!(sm.next_u64(), 6457827717110365317);
        assert_eq!(sm.next_u64(), 3203168211198807973);
        assert_eq!(sm.next_u64(), 9817491932198370423);
    }

    #[test]
    fn equal_seeds_equal_streams() {
        let mut a = RngStreams::from_seed(99);
        let mut b = RngStreams::from_seed(99);
        for _ in 0..1000 {
            assert_eq!(a.options.index(17), b.options.index(17));
        }
        assert_eq!(a.ties.key(), b.ties.key());
        assert_eq!(a.ties.pick(5, 3), b.ties.pick(5, 3));
    }

    #[test]
    fn tie_picks_do_not_touch_option_stream() {
        let mut a = RngStreams::from_seed(3);
        let mut b = RngStreams::from_seed(3);
        for step in 0..100 {
            let _ = b.ties.pick(step, 4);
        }
        for _ in 0..100 {
            assert_eq!(a.options.index(1000), b.options.index(1000));
        }
    }

    #[test]
    fn index_covers_range() {
        let mut s = RngStreams::from_seed(0);
        let mut seen = [false; 5];
        for _ in 0..200 {
            seen[s.options.index(5) as usize] = true;
        }
        assert!(seen.iter().all(|&x| x));
        assert_eq!(s.options.index(1), 0);
    }

    #[test]
    fn replication_seeds_are_prefix_stable() {
        let first: Vec<u64> = (0..4).map(|r| replication_seed(42, r)).collect();
        let more: Vec<u64> = (0..8).map(|r| replication_seed(42, r)).collect();
        assert_eq!(&more[..4], &first[..]);
        let mut sorted = more.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 8);
    }
}
