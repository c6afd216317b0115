//! Seed derivation. Every random stream in the workbench is a ChaCha8 generator
//! keyed by a 64-bit seed derived from a parent seed and a list of stream labels,
//! so results never depend on call order across independent streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a, used to turn string labels into stream ids.
pub fn label(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

pub fn derive(parent: u64, streams: &[u64]) -> u64 {
    streams
        .iter()
        .fold(splitmix64(parent), |acc, &s| splitmix64(acc ^ splitmix64(s)))
}

pub fn stream(parent: u64, streams: &[u64]) -> Rng {
    ChaCha8Rng::seed_from_u64(derive(parent, streams))
}
