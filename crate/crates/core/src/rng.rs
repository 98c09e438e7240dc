//! Reproducible per-replica random streams.
//!
//! Every replica draws from its own ChaCha stream selected by
//! `(master_seed, replica_index)`, so ensembles are pure functions of the
//! seed spec regardless of how replicas are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Seed specification for one replica stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSeedSpec {
    pub master_seed: u64,
    pub replica_index: u64,
}

impl RngSeedSpec {
    pub fn new(master_seed: u64, replica_index: u64) -> Self {
        RngSeedSpec {
            master_seed,
            replica_index,
        }
    }

    /// The deterministic generator for this (seed, replica) pair.
    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.replica_index);
        rng
    }
}

/// Fills `out` with independent standard normal draws from `rng`.
pub fn fill_standard_normal(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = StandardNormal.sample(rng);
    }
}

/// One standard normal draw.
#[inline]
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}
