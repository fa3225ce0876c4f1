//! Seeded random sources.
//!
//! All randomness in the crate comes from ChaCha20 (`rand_chacha`), keyed by a
//! 64-bit seed and split into independent substreams with the ChaCha stream
//! counter. The generator is platform independent, so a seed reproduces the
//! same draws everywhere.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::linalg::CVec;

pub type SimRng = ChaCha20Rng;

/// Generator for substream `stream` of `seed`.
pub fn seeded_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One draw from CN(0, 1).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Uniform draw from `[lo, hi)`.
pub fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Unit-modulus vector with independent phases uniform on `[0, 2π)`.
pub fn random_phases(n: usize, seed: u64) -> CVec {
    let mut rng = seeded_rng(seed, 0);
    CVec::from_iterator(
        n,
        (0..n).map(|_| Complex64::from_polar(1.0, uniform(&mut rng, 0.0, 2.0 * PI))),
    )
}

/// SplitMix64 finalizer, used to derive well-separated seeds from small keys.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
