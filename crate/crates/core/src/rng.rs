use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent stream for trial `index` under `seed`. Results never depend
/// on the order in which trials are evaluated.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
