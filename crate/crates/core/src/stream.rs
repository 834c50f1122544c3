//! Counter-based random streams.
//!
//! Every Monte-Carlo draw gets its own ChaCha stream addressed by
//! `(seed, index)`, so draws can be evaluated in any order or on any
//! number of workers and still see identical randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type DrawRng = ChaCha8Rng;

pub fn draw_stream(seed: u64, index: u64) -> DrawRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A stream for auxiliary consumers (e.g. the covariance sampling oracle)
/// that must not collide with the parameter draws of the same seed.
pub fn aux_stream(seed: u64, index: u64, salt: u64) -> DrawRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt.rotate_left(29) ^ 0x9E37_79B9_7F4A_7C15);
    rng.set_stream(index);
    rng
}
