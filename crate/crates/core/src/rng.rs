//! Seeded, platform-independent randomness.
//!
//! Every sampler takes a [`RandomSource`]. The generator is ChaCha8, so a
//! given seed yields the same stream on every platform. Independent streams
//! for parallel or order-independent work come from [`RandomSource::stream`],
//! which keeps the key derived from the master seed and selects the ChaCha
//! stream by index.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Stream `index` of the master `seed`. Streams never overlap and do not
    /// depend on how many values other streams consumed.
    pub fn stream(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        RandomSource { seed, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw from `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Index drawn with probability proportional to `weights`. Zero and
    /// negative entries are never chosen. Returns `None` when nothing is
    /// positive.
    pub fn categorical(&mut self, weights: &[f64]) -> Option<usize> {
        let total: f64 = weights.iter().filter(|w| **w > 0.0).sum();
        if total <= 0.0 {
            return None;
        }
        let target = self.uniform() * total;
        let mut acc = 0.0;
        let mut last = None;
        for (k, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                acc += w;
                last = Some(k);
                if target < acc {
                    return last;
                }
            }
        }
        // target fell past the accumulated sum through rounding
        last
    }

    /// Index into a prefix-sum table: the first `k` with `cumulative[k]`
    /// strictly above a uniform draw times the total. Entries that did not
    /// grow the sum are never returned.
    #[inline]
    pub fn from_cumulative(&mut self, cumulative: &[f64]) -> Option<usize> {
        let total = *cumulative.last()?;
        if total <= 0.0 {
            return None;
        }
        let target = self.uniform() * total;
        let k = cumulative.partition_point(|&c| c <= target);
        if k < cumulative.len() {
            Some(k)
        } else {
            // rounding pushed target to the total; take the last growing entry
            (1..cumulative.len()).rev().find(|&k| cumulative[k] > cumulative[k - 1]).or(Some(0))
        }
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
