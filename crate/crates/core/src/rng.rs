//! Deterministic counter-based random number generation.
//!
//! Every stochastic component of the crate draws from [`CounterRng`], a
//! counter-mode SplitMix64 generator: output `i` is the SplitMix64 finalizer
//! applied to `key + (i + 1) * GOLDEN_GAMMA`. The mapping `(key, counter) ->
//! u64` is pure, so streams can be replayed, split per replica, and shared
//! across thread counts without coordination. The algorithm identifier below
//! is recorded in run records and manifests so outputs stay attributable to
//! the exact generator.

use rand::RngCore;

/// Identifier recorded in outputs that carry random numbers.
pub const RNG_ALGORITHM_ID: &str = "splitmix64-ctr/1";

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer (Stafford mix 13).
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed and a path of labels.
///
/// Used to give each (grid point, replica, purpose) its own independent
/// stream: `derive_seed(master, &[grid_index, replica])`.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut key = mix64(master ^ GOLDEN_GAMMA);
    for &p in parts {
        key = mix64(key ^ mix64(p.wrapping_add(GOLDEN_GAMMA)));
    }
    key
}

/// Counter-based 64-bit generator. `Clone` forks an identical replay.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(key: u64) -> Self {
        Self { key, counter: 0 }
    }

    /// Stateless stream derivation; the child is independent of `self`'s
    /// position.
    pub fn substream(&self, label: u64) -> Self {
        Self::new(derive_seed(self.key, &[label]))
    }

    #[inline]
    pub fn next_value(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform in [0, 1) with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_value() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }
}

impl RngCore for CounterRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_value() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.next_value()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let bytes = self.next_value().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn replay_is_identical() {
        let mut a = CounterRng::new(42);
        let mut b = CounterRng::new(42);
        for _ in 0..1000 {
            assert_eq!(a.next_value(), b.next_value());
        }
    }

    #[test]
    fn substreams_differ() {
        let base = CounterRng::new(7);
        let mut s0 = base.substream(0);
        let mut s1 = base.substream(1);
        let v0: Vec<u64> = (0..8).map(|_| s0.next_value()).collect();
        let v1: Vec<u64> = (0..8).map(|_| s1.next_value()).collect();
        assert_ne!(v0, v1);
    }

    #[test]
    fn derive_seed_depends_on_every_part() {
        let a = derive_seed(1, &[2, 3]);
        assert_ne!(a, derive_seed(1, &[2, 4]));
        assert_ne!(a, derive_seed(1, &[3, 2]));
        assert_ne!(a, derive_seed(2, &[2, 3]));
    }

    #[test]
    fn uniform_in_unit_interval_with_plausible_mean() {
        let mut rng = CounterRng::new(123);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let u = rng.uniform();
            assert!((0.0..1.0).contains(&u));
            sum += u;
        }
        let mean = sum / n as f64;
        // 5 sigma of a mean of Uniform(0,1) draws
        assert!((mean - 0.5).abs() < 5.0 * (1.0 / 12.0f64).sqrt() / (n as f64).sqrt());
    }

    #[test]
    fn range_sampling_via_rng_trait() {
        let mut rng = CounterRng::new(5);
        for _ in 0..1000 {
            let x: u64 = rng.random_range(0..17);
            assert!(x < 17);
        }
    }
}
