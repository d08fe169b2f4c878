//! Seeded random streams.
//!
//! Every random quantity comes from a ChaCha8 generator keyed by the user
//! seed, with the 64-bit stream id `(domain << 48) | index` selecting an
//! independent sequence:
//!
//! * domain [`SHIFT_DOMAIN`], index ℓ: the ℓ-th random shift;
//! * domain [`MC_DOMAIN`], index ℓ: the ℓ-th Monte Carlo replicate group.
//!
//! Within a Monte Carlo group, point k of dimension s reads the 64-bit words
//! k·s .. (k+1)·s of its stream, so any worker can seek straight to its
//! points and the output does not depend on how the work is scheduled.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::normal;

pub const SHIFT_DOMAIN: u64 = 1;
pub const MC_DOMAIN: u64 = 2;

/// Generator for stream `index` of `domain` under `seed`.
pub fn stream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((domain << 48) | (index & 0xffff_ffff_ffff));
    rng
}

/// Uniform in [0, 1) with 53 random bits.
#[inline]
pub fn unit_closed_open(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform in the open interval (0, 1): the midpoint of a 2⁻⁵³ cell.
#[inline]
pub fn unit_open(word: u64) -> f64 {
    ((word >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// `l` independent uniform shifts in [0, 1)^dim.
pub fn sample_shifts(l: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..l)
        .map(|ell| {
            let mut rng = stream(seed, SHIFT_DOMAIN, ell as u64);
            (0..dim).map(|_| unit_closed_open(rng.next_u64())).collect()
        })
        .collect()
}

/// Reader for the standard normal vectors of one Monte Carlo group.
#[derive(Clone)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
    dim: usize,
}

impl GaussianStream {
    pub fn new(seed: u64, group: usize, dim: usize) -> Self {
        Self {
            rng: stream(seed, MC_DOMAIN, group as u64),
            dim,
        }
    }

    /// Writes the k-th standard normal vector of the group into `out`.
    pub fn point_into(&mut self, k: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        // Word positions count 32-bit words; each draw takes two.
        self.rng.set_word_pos(2 * (k as u128) * (self.dim as u128));
        for v in out.iter_mut() {
            *v = normal::inverse_cdf_unchecked(unit_open(self.rng.next_u64()));
        }
    }
}
