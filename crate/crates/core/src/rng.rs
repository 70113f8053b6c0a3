//! Seeded, platform-independent randomness.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Deterministic random stream. The same seed gives the same sequence on every
/// platform (ChaCha12 keyed from a 64-bit seed).
#[derive(Clone, Debug)]
pub struct BenchRng {
    seed: u64,
    inner: ChaCha12Rng,
}

impl BenchRng {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl RngCore for BenchRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// One round of the splitmix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives an independent seed from a base seed and a list of coordinates.
/// Each coordinate is folded in with its own splitmix round, so adding a new
/// coordinate value never perturbs seeds derived from existing ones.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}
