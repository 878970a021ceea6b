//! Counter-based Gaussian source.
//!
//! Each draw is a pure function of `(seed, stream, counter)`: the ChaCha8
//! keystream for `seed` on `stream` is read at word position `4 * counter`,
//! and the two 64-bit words found there feed one Box–Muller transform. The
//! counter for a lattice frequency depends only on the frequency, so boxes of
//! different cutoffs share their common draws.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STREAM_G: u64 = 0x67;
pub const STREAM_H: u64 = 0x68;

/// Two independent standard normals at `(seed, stream, counter)`.
pub fn normal_pair(seed: u64, stream: u64, counter: u128) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(counter * 4);
    let a = rng.next_u64();
    let b = rng.next_u64();
    let u1 = ((a >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
    let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    (r * c, r * s)
}

fn zigzag(c: i64) -> u128 {
    if c >= 0 {
        2 * c as u128
    } else {
        2 * c.unsigned_abs() as u128 - 1
    }
}

/// Injective map `Z^d -> N` (zigzag per coordinate, folded by Cantor
/// pairing).
pub fn freq_counter(n: &[i64]) -> u128 {
    let mut it = n.iter().map(|&c| zigzag(c));
    let first = it.next().unwrap_or(0);
    it.fold(first, |a, b| (a + b) * (a + b + 1) / 2 + b)
}

/// SplitMix64 finalizer, used to derive independent sub-seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for the `index`-th realization derived from `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index.wrapping_add(0xD1B5_4A32_D192_ED03)))
}
