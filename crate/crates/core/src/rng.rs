//! Counter-based seed derivation: every random stream is a pure function of
//! the root seed and a path of integer tags, so parallel work reproduces
//! bit-for-bit regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the child stream `path` under `root`.
pub fn derive_seed(root: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(root), |acc, &tag| splitmix64(acc ^ splitmix64(tag)))
}

pub fn stream(root: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, path))
}

/// Stream tags used across the crate.
pub mod tags {
    pub const TASK_CENTERS: u64 = 1;
    pub const TEST_SET: u64 = 2;
    pub const CLIENT_DATA: u64 = 3;
    pub const SUBSET: u64 = 4;
    pub const FLIP: u64 = 5;
    pub const SHUFFLE: u64 = 6;
}
