//! Seed derivation for reproducible runs.
//!
//! Every random stream in a run is a `ChaCha8Rng` seeded from the master seed
//! mixed with a purpose tag and up to two indices (client, round). The mixing
//! function is SplitMix64, which is fixed-width integer arithmetic and
//! therefore identical on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream type used throughout the crate.
pub type Stream = ChaCha8Rng;

/// What a derived stream is used for. Distinct purposes never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Dataset = 1,
    Split = 2,
    Partition = 3,
    ModelInit = 4,
    LocalTraining = 5,
    Attack = 6,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit hash of `(master, purpose, client, round)`.
pub fn derive_seed(master: u64, purpose: Purpose, client: u64, round: u64) -> u64 {
    let mut h = splitmix64(master);
    for word in [purpose as u64, client, round] {
        h = splitmix64(h ^ word);
    }
    h
}

pub fn stream(master: u64, purpose: Purpose, client: u64, round: u64) -> Stream {
    Stream::seed_from_u64(derive_seed(master, purpose, client, round))
}

pub fn stream_from_seed(seed: u64) -> Stream {
    Stream::seed_from_u64(seed)
}
