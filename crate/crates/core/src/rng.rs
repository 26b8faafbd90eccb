//! Seeded random streams. Every stochastic routine takes an explicit [`Rng`].

use rand::SeedableRng;

pub type Rng = rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Derives an independent seed for a named sub-stream (splitmix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn uniform(rng: &mut Rng, low: f64, high: f64) -> f64 {
    use rand::Rng as _;
    low + (high - low) * rng.random::<f64>()
}

pub fn index(rng: &mut Rng, len: usize) -> usize {
    use rand::Rng as _;
    rng.random_range(0..len)
}
