//! Counter-style random streams: every repetition owns a ChaCha stream that is
//! a pure function of `(seed, repetition)`, so results do not depend on how
//! repetitions are spread over threads.

use crate::normal::std_normal_quantile;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

/// Random stream for one repetition.
pub struct Stream(ChaCha8Rng);

impl Stream {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Stream(rng)
    }

    /// Uniform draw strictly inside `(0, 1)`.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.0.next_u64() >> 11) as f64 + 0.5) * INV_2_53
    }

    /// Uniform draw on `(-1, 1)`.
    #[inline]
    pub fn symmetric_unit(&mut self) -> f64 {
        2.0 * self.uniform_open() - 1.0
    }

    /// Standard normal draw by inverse-CDF transform.
    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        std_normal_quantile(self.uniform_open()).expect("uniform draw lies in (0, 1)")
    }
}

/// SplitMix64 finaliser.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the `index`-th independent experiment derived from `seed`
/// (e.g. one point of a parameter sweep).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(1)))
}
