//! Seeded uniform streams.
//!
//! Every path or trace draws from its own ChaCha8 substream keyed by
//! `(master seed, index)`, so batch results do not depend on how work is
//! split across threads.

use rand::distributions::{Distribution, Standard};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A source of uniform variates in `[0, 1)`.
pub trait UniformSource {
    fn next_uniform(&mut self) -> f64;
}

impl<R: RngCore> UniformSource for R {
    #[inline]
    fn next_uniform(&mut self) -> f64 {
        Standard.sample(self)
    }
}

/// Independent substream `index` of the master `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Replays a fixed list of uniforms, cycling when exhausted.
#[derive(Debug, Clone)]
pub struct FixedStream {
    values: Vec<f64>,
    pos: usize,
}

impl FixedStream {
    pub fn new(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "fixed stream needs at least one value");
        FixedStream { values, pos: 0 }
    }
}

impl UniformSource for FixedStream {
    fn next_uniform(&mut self) -> f64 {
        let v = self.values[self.pos % self.values.len()];
        self.pos += 1;
        v
    }
}
