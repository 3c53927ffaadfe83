use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent deterministic stream for one stage of one run.
pub fn stream(seed: u64, stage: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ stage.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}
