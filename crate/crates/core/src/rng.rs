//! Seeded, splittable random number generation.
//!
//! Every stochastic routine takes a 64-bit seed and derives independent
//! streams per work item (sequence index, depth index, circuit instance)
//! through `derive`, so sweeps parallelize without sharing generator state
//! and results do not depend on thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for the sub-stream identified by `(seed, stream)`.
pub fn derive(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A further split for nested loops (depth within protocol, shot block).
pub fn derive2(seed: u64, a: u64, b: u64) -> Rng {
    // mix the pair into one stream id; the multiplier is an odd 64-bit
    // constant so distinct (a, b) rarely collide
    let stream = a
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(b.wrapping_mul(0xD1B5_4A32_D192_ED03));
    derive(seed, stream)
}

/// Binomial sample `k ~ Bin(n, p)` as a fraction `k/n`.
pub fn binomial_fraction(rng: &mut Rng, n: u64, p: f64) -> f64 {
    use rand::Rng as _;
    use rand_distr::{Binomial, Distribution};
    if n == 0 {
        return f64::NAN;
    }
    let p = p.clamp(0.0, 1.0);
    if p == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        // consume one value to keep the stream position deterministic
        let _ = rng.gen::<u64>();
        return 1.0;
    }
    let d = Binomial::new(n, p).expect("probability already clamped");
    d.sample(rng) as f64 / n as f64
}
