//! Deterministic seed derivation and small sampling helpers.
//!
//! Every randomized stage (sampling, data generation, weight init, attack
//! noise) runs on its own ChaCha stream seeded through [`derive_seed`], so a
//! resumed run can rebuild the exact stream for trial `i` from the base seed
//! alone — no RNG state ever needs to be serialized.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags keep streams for different purposes disjoint even when they
/// share a base seed and index.
pub mod domain {
    pub const SAMPLE: u64 = 0x5341_4d50_4c45_0001; // genotype sampling
    pub const DATASET: u64 = 0x4441_5441_5345_0002; // synthetic data generation
    pub const WEIGHTS: u64 = 0x5745_4947_4854_0003; // network weight init
    pub const ATTACK: u64 = 0x4154_5441_434b_0004; // adversarial noise
    pub const NOISE: u64 = 0x4e4f_4953_4500_0005; // evaluator observation noise
    pub const TRIAL: u64 = 0x5452_4941_4c00_0006; // per-trial evaluator seeds
}

/// splitmix64 finalizer; a strong 64-bit mixer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Collapses `(base, domain, index)` into one well-mixed 64-bit seed.
pub fn derive_seed(base: u64, domain: u64, index: u64) -> u64 {
    mix(mix(mix(base) ^ domain) ^ index)
}

/// The stream for `(base, domain, index)`.
pub fn stream(base: u64, domain: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, domain, index))
}

/// One standard-normal draw via Box-Muller (two uniforms per pair of draws
/// would waste one; a single transform is plenty here).
pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // u in (0, 1] so the log is finite.
    let u: f64 = 1.0 - rng.gen::<f64>();
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}
