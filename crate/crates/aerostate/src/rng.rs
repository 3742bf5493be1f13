//! Deterministic RNG streams for the particle filters.
//!
//! Every random draw in the estimation stack comes from a ChaCha8 stream
//! addressed by (master seed, step counter, lane). Lanes separate particles
//! from each other and from the resampling draw, so a particle's noise
//! sequence does not depend on evaluation order or thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const LANE_RESAMPLE: u64 = u64::MAX;
const LANE_INIT: u64 = u64::MAX - 1;

/// Factory for per-particle, per-step RNG streams derived from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStreams {
    master: u64,
}

impl RngStreams {
    pub fn new(master_seed: u64) -> Self {
        Self { master: master_seed }
    }

    pub fn master_seed(&self) -> u64 {
        self.master
    }

    fn stream(&self, step: u64, lane: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        // splitmix64-style mix keeps distinct (step, lane) pairs on
        // distinct ChaCha streams.
        let mut z = step
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(lane);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        rng.set_stream(z ^ (z >> 31));
        rng
    }

    /// Stream for particle `index` at motion/measurement step `step`.
    pub fn particle(&self, step: u64, index: usize) -> ChaCha8Rng {
        self.stream(step, index as u64)
    }

    /// Stream for the single systematic-resampling draw at `step`.
    pub fn resample(&self, step: u64) -> ChaCha8Rng {
        self.stream(step, LANE_RESAMPLE)
    }

    /// Stream for cloud (re)initialization events at `step`.
    pub fn init(&self, step: u64) -> ChaCha8Rng {
        self.stream(step, LANE_INIT)
    }
}
