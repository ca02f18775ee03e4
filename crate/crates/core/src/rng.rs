//! Portable seeded randomness.
//!
//! Every random decision in the crate (weight initialization, shuffles,
//! expat sampling, tie-breaks) flows through [`SeededRng`], a SplitMix64
//! generator. SplitMix64 is defined purely in terms of wrapping 64-bit
//! integer arithmetic, so a given seed yields the same sequence on every
//! platform.
//!
//! Seed splitting: a consumer that needs its own stream calls
//! [`SeededRng::derive`] with a stream number. The child seed is the first
//! SplitMix64 output of `seed + GOLDEN * (stream + 1)`. Streams used by the
//! crate are listed in [`streams`].

use serde::{Deserialize, Serialize};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream numbers used with [`SeededRng::derive`].
pub mod streams {
    /// Weight initialization; the ANN's flat index is added.
    pub const INIT: u64 = 1 << 32;
    /// SGD shuffles; the ANN's flat index is added.
    pub const SGD: u64 = 2 << 32;
    /// GDT shuffles; the ANN's flat index is added.
    pub const GDT: u64 = 3 << 32;
    /// Expat sampling in load assignment.
    pub const LOADS: u64 = 4 << 32;
    /// Tie-break streams for evaluation; the datum id is added.
    pub const TIES: u64 = 5 << 32;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeededRng {
    state: u64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Independent generator for `stream`, derived from `seed`.
    pub fn derive(seed: u64, stream: u64) -> Self {
        let mut parent = Self::new(seed.wrapping_add(GOLDEN.wrapping_mul(stream.wrapping_add(1))));
        Self::new(parent.next_u64())
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `0..n`, unbiased (rejection sampling). `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let x = self.next_u64();
            if x < zone {
                return (x % n) as usize;
            }
        }
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}
