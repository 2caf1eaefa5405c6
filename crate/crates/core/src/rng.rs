//! Counter-based random streams.
//!
//! Every random quantity is addressed by `(seed, replicate, index)`. A replicate owns
//! its own ChaCha stream, and the `index`-th standard normal pair sits at a fixed
//! position inside it, so values never depend on how work is split across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS_PER_PAIR: u128 = 4;

pub fn stream(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

fn box_muller(a: u64, b: u64) -> (f64, f64) {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    // u1 in (0, 1], u2 in [0, 1)
    let u1 = ((a >> 11) + 1) as f64 * SCALE;
    let u2 = (b >> 11) as f64 * SCALE;
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    (r * c, r * s)
}

/// The `index`-th pair of independent standard normals of a replicate.
pub fn normal_pair(seed: u64, replicate: u64, index: u64) -> (f64, f64) {
    let mut rng = stream(seed, replicate);
    rng.set_word_pos(index as u128 * WORDS_PER_PAIR);
    let a = rng.next_u64();
    let b = rng.next_u64();
    box_muller(a, b)
}

/// Sequential reader of the same normal pairs that [`normal_pair`] addresses.
pub struct Normals {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Normals {
    pub fn new(seed: u64, replicate: u64) -> Self {
        Normals { rng: stream(seed, replicate), spare: None }
    }

    /// Starts reading at pair `index`.
    pub fn at(seed: u64, replicate: u64, index: u64) -> Self {
        let mut rng = stream(seed, replicate);
        rng.set_word_pos(index as u128 * WORDS_PER_PAIR);
        Normals { rng, spare: None }
    }

    pub fn pair(&mut self) -> (f64, f64) {
        let a = self.rng.next_u64();
        let b = self.rng.next_u64();
        box_muller(a, b)
    }

    pub fn next(&mut self) -> f64 {
        if let Some(x) = self.spare.take() {
            return x;
        }
        let (x, y) = self.pair();
        self.spare = Some(y);
        x
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        for x in out.iter_mut() {
            *x = self.next();
        }
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}
