//! Seed derivation. Every random stream in a run is a pure function of the
//! master seed and a structural position (generation, slot, purpose), never
//! of scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Bit set on every terrain seed drawn during evolution. Held-out seeds
/// (reassessment, ablation) must keep it clear, which makes the two sets
/// disjoint by construction.
pub const EVOLUTION_SEED_BIT: u64 = 1 << 63;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x5EED_0F5E_ED5E_ED00, |acc, &p| mix64(acc ^ mix64(p)))
}

pub fn rng_from(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) mod purpose {
    pub const VARIATION: u64 = 1;
    pub const TERRAIN: u64 = 2;
    pub const INIT: u64 = 3;
    pub const SENSOR_NOISE: u64 = 4;
    pub const FINETUNE_INIT: u64 = 5;
}

pub fn evolution_terrain_seed(master_seed: u64, generation: u64, slot: u64) -> u64 {
    derive(&[master_seed, purpose::TERRAIN, generation, slot]) | EVOLUTION_SEED_BIT
}

/// Sensor noise stream of one evaluation, keyed by its terrain seed so that a
/// fitness evaluation is a pure function of (genotype, terrain seed).
pub fn noise_seed(terrain_seed: u64) -> u64 {
    derive(&[terrain_seed, purpose::SENSOR_NOISE])
}
