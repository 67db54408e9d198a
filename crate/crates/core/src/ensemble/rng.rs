//! Per-particle uniform variates.
//!
//! The generator is pinned: the ChaCha8 keystream of `rand_chacha` 0.9,
//! keyed by `ChaCha8Rng::seed_from_u64(seed)`. Particle `i` reads the 64-bit
//! word at word position `2 i` of that keystream and keeps its top 53 bits as
//! a variate in `[0, 1)`. Each particle's variate therefore depends only on
//! `(seed, i)`, whichever shard draws it and in whatever order.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub(crate) struct ParticleStream {
    rng: ChaCha8Rng,
}

impl ParticleStream {
    pub(crate) fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub(crate) fn variate(&mut self, particle: u64) -> f64 {
        let pos = 2 * u128::from(particle);
        // Sequential particles need no seek.
        if self.rng.get_word_pos() != pos {
            self.rng.set_word_pos(pos);
        }
        unit_interval(self.rng.next_u64())
    }
}

fn unit_interval(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
