//! Seeded, sharded Monte Carlo.
//!
//! Splitting rule: a run of `n` samples is cut into shards of
//! [`SHARD_SIZE`] consecutive samples (the last one possibly shorter).
//! Shard `k` draws from `ChaCha8Rng::seed_from_u64(seed)` switched to stream
//! `k`. Shards are reduced in index order, so results do not depend on the
//! number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::Kernel;
use crate::rat::Interval;

pub const SHARD_SIZE: usize = 1 << 16;

/// Confidence level of the one-sided Hoeffding bound is `1 - HOEFFDING_DELTA`.
pub const HOEFFDING_DELTA: f64 = 1e-6;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct Seed(pub u64);

impl Default for Seed {
    fn default() -> Self {
        Seed(0x5eed)
    }
}

pub type McRng = ChaCha8Rng;

pub fn shard_rng(seed: Seed, shard: u64) -> McRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
    rng.set_stream(shard);
    rng
}

/// Runs `sample` once per sample into a per-shard accumulator, then merges
/// the shard accumulators left to right.
pub fn sharded_fold<A, I, S, M>(samples: usize, seed: Seed, init: I, sample: S, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, &mut McRng) + Sync,
    M: Fn(A, A) -> A,
{
    let shards = samples.div_ceil(SHARD_SIZE);
    let parts: Vec<A> = (0..shards)
        .into_par_iter()
        .map(|k| {
            let mut rng = shard_rng(seed, k as u64);
            let mut acc = init();
            let len = SHARD_SIZE.min(samples - k * SHARD_SIZE);
            for _ in 0..len {
                sample(&mut acc, &mut rng);
            }
            acc
        })
        .collect();
    parts.into_iter().fold(init(), merge)
}

/// Number of samples for which `event` fires.
pub fn count_hits<F>(samples: usize, seed: Seed, event: F) -> u64
where
    F: Fn(&mut McRng) -> bool + Sync,
{
    sharded_fold(
        samples,
        seed,
        || 0u64,
        |acc, rng| *acc += event(rng) as u64,
        |a, b| a + b,
    )
}

/// A Monte Carlo probability with a one-sided Hoeffding lower bound.
#[derive(Clone, Copy, PartialEq, Debug, Serialize)]
pub struct ProbEstimate {
    pub estimate: f64,
    pub lower_bound: f64,
    pub std_error: f64,
    pub hits: u64,
    pub samples: usize,
    pub seed: u64,
}

impl ProbEstimate {
    pub fn from_hits(hits: u64, samples: usize, seed: Seed) -> Self {
        let n = samples as f64;
        let p = hits as f64 / n;
        let radius = ((1.0 / HOEFFDING_DELTA).ln() / (2.0 * n)).sqrt();
        ProbEstimate {
            estimate: p,
            lower_bound: (p - radius).max(0.0),
            std_error: (p * (1.0 - p) / n).sqrt(),
            hits,
            samples,
            seed: seed.0,
        }
    }

    /// `|estimate - p| <= k` standard errors, with the standard error taken
    /// at the reference value `p`.
    pub fn within_sigmas(&self, p: f64, k: f64) -> bool {
        let se = (p * (1.0 - p) / self.samples as f64).sqrt();
        (self.estimate - p).abs() <= k * se
    }
}

impl Kernel {
    /// One uniform draw on `[0, w)`.
    #[inline]
    pub fn draw_noise<R: Rng>(&self, rng: &mut R) -> f64 {
        rng.random::<f64>() * self.width_f64()
    }

    /// `n` states of one path from `x0`; stream 0 of `seed`.
    pub fn simulate_path(&self, x0: f64, n: usize, seed: Seed) -> Vec<f64> {
        let mut rng = shard_rng(seed, 0);
        let mut x = x0;
        (0..n)
            .map(|_| {
                x = self.step_unchecked(x, self.draw_noise(&mut rng));
                x
            })
            .collect()
    }

    /// Endpoint of an `n`-step path.
    #[inline]
    pub fn run<R: Rng>(&self, x0: f64, n: usize, rng: &mut R) -> f64 {
        let mut x = x0;
        for _ in 0..n {
            x = self.step_unchecked(x, self.draw_noise(rng));
        }
        x
    }

    /// Estimate of `K^n(x0, target)`.
    pub fn kn_prob_mc(
        &self,
        x0: f64,
        target: &Interval,
        n: usize,
        samples: usize,
        seed: Seed,
    ) -> ProbEstimate {
        let (lo, hi) = (target.lo.to_f64(), target.hi.to_f64());
        let hits = count_hits(samples, seed, |rng| {
            let x = self.run(x0, n, rng);
            lo <= x && x < hi
        });
        ProbEstimate::from_hits(hits, samples, seed)
    }
}
