//! Seed derivation for independent per-trial random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed used when neither a flag nor `NETSENSE_SEED` supplies one.
pub const DEFAULT_SEED: u64 = 20_220_915;

/// Environment variable that overrides [`DEFAULT_SEED`].
pub const SEED_ENV: &str = "NETSENSE_SEED";

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of child stream `index` under `master`. Depends only on the pair,
/// so trials can run in any order.
pub fn child_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ splitmix64(index.wrapping_add(0xA076_1D64_78BD_642F)))
}

pub fn child_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(child_seed(master, index))
}

/// `NETSENSE_SEED` if set and parseable, else [`DEFAULT_SEED`].
pub fn default_seed() -> u64 {
    std::env::var(SEED_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_SEED)
}
