use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic generator for `(seed, stream)`. Distinct streams under one
/// seed are independent, so subsystems never share a sequence.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed for sub-task `index` of stream `stream`.
pub fn child_seed(seed: u64, stream: u64, index: u64) -> u64 {
    use rand::RngCore;
    let mut rng = seeded_rng(seed, stream);
    rng.set_word_pos(u128::from(index) * 2);
    rng.next_u64()
}
