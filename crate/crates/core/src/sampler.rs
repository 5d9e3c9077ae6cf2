//! Seeded randomness for generation and sampling.
//!
//! The generator is xoshiro256++ (Blackman and Vigna, 2019), seeded from a
//! 64-bit value through SplitMix64 as in `rand_xoshiro::seed_from_u64`.
//! Uniform reals use the top 53 bits of one 64-bit output, so categorical
//! boundaries do not depend on platform float behavior.
//!
//! Independent streams for named stages are derived from the master seed,
//! never from the master's current state:
//!
//! ```text
//! stage_seed = splitmix64(master_seed ^ fnv1a64(tag))
//! ```
//!
//! so draws in one stage are unaffected by how many draws other stages make.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use thiserror::Error;

use crate::distribution::{DiscreteDistribution, SupportValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("rssi support value {0} is not negative")]
    NonNegativeRssi(i64),
}

#[derive(Debug, Clone)]
pub struct Prng {
    seed: u64,
    inner: Xoshiro256PlusPlus,
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, b| {
        (h ^ u64::from(*b)).wrapping_mul(FNV_PRIME)
    })
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed used for the stage named `tag` under `master`.
pub fn stage_seed(master: u64, tag: &str) -> u64 {
    splitmix64(master ^ fnv1a64(tag.as_bytes()))
}

impl Prng {
    pub fn new(seed: u64) -> Self {
        Prng {
            seed,
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    /// Stream for a named stage of the master seed `seed`.
    pub fn for_stage(seed: u64, tag: &str) -> Self {
        Prng::new(stage_seed(seed, tag))
    }

    /// Child stream keyed by this generator's seed and `tag`.
    pub fn stage(&self, tag: &str) -> Self {
        Prng::for_stage(self.seed, tag)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in [0, 1) with 53 random mantissa bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n), unbiased (Lemire's multiply-and-reject).
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = u128::from(self.next_u64()) * u128::from(n);
            if (m as u64) >= threshold {
                return (m >> 64) as usize;
            }
        }
    }

    /// Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// `k` distinct indices from `0..n` in random order (partial
    /// Fisher–Yates). Panics if `k > n`.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot sample {k} of {n}");
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            idx.swap(i, j);
        }
        idx.truncate(k);
        idx
    }
}

/// Draws one support value: a single uniform variate in [0, 100) is
/// compared against the running cumulative percent, in entry order.
pub fn draw_categorical<V: SupportValue>(dist: &DiscreteDistribution<V>, rng: &mut Prng) -> V {
    let u = rng.uniform() * 100.0;
    let mut cumulative = 0.0;
    let mut last_positive = None;
    for (value, percent) in dist.entries() {
        if *percent > 0.0 {
            last_positive = Some(*value);
        }
        cumulative += percent;
        if u < cumulative {
            return *value;
        }
    }
    // Sum fell short of 100 within tolerance and u landed in the gap.
    last_positive.unwrap_or(dist.entries()[0].0)
}

pub fn draw_bernoulli(p: f64, rng: &mut Prng) -> Result<i64, SampleError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(SampleError::ProbabilityOutOfRange(p));
    }
    Ok(i64::from(rng.uniform() < p))
}

pub fn draw_rssi(rule: &DiscreteDistribution<i64>, rng: &mut Prng) -> Result<i64, SampleError> {
    if let Some(bad) = rule.support().find(|v| *v >= 0) {
        return Err(SampleError::NonNegativeRssi(bad));
    }
    Ok(draw_categorical(rule, rng))
}
