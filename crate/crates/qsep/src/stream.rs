//! Counter-based random substreams.
//!
//! Every random draw in the pipeline comes from a ChaCha8 stream whose seed
//! is derived from (master seed, purpose lane, indices...). Substreams are
//! therefore independent of generation order: regenerating one sample pulls
//! exactly the bytes it pulled inside a full run.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

/// Purpose lanes keep substreams for different pipeline stages disjoint even
/// when their numeric indices collide.
pub mod lanes {
    /// Pool acquisition (per protocol state).
    pub const POOL: u64 = 1;
    /// Time-mixed sample draws (per dataset row).
    pub const MIX: u64 = 2;
    /// Network weight initialization.
    pub const INIT: u64 = 3;
    /// Free-standing measurement runs (calibration checks, examples).
    pub const MEASURE: u64 = 4;
    /// Derived dataset seeds (train/test splits of one master seed).
    pub const DATASET: u64 = 5;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Collapse (master, path) into a single substream seed. The fold is
/// position-sensitive, so permuted paths land on different seeds.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut h = splitmix64(master ^ 0x6a09e667f3bcc908);
    for &x in path {
        h = splitmix64(h ^ splitmix64(x));
    }
    h
}

/// Deterministic ChaCha8 stream for (master, path).
pub fn substream(master: u64, path: &[u64]) -> ChaCha8Rng {
    seeded_rng(derive_seed(master, path))
}

/// ChaCha8 stream expanded from a single 64-bit seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    for (i, chunk) in bytes.chunks_exact_mut(8).enumerate() {
        chunk.copy_from_slice(&splitmix64(seed.wrapping_add(i as u64)).to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}

/// One binomial draw with the degenerate edges short-circuited.
pub fn binomial(rng: &mut impl Rng, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p)
        .expect("p checked to lie in (0, 1)")
        .sample(rng)
}

/// Multinomial draw over four cells via chained binomials; `probs` must be
/// non-negative and is normalized internally.
pub fn multinomial4(rng: &mut impl Rng, n: u64, probs: [f64; 4]) -> [u64; 4] {
    let total: f64 = probs.iter().sum();
    let mut out = [0u64; 4];
    if total <= 0.0 {
        return out;
    }
    let mut remaining_n = n;
    let mut remaining_p = total;
    for i in 0..3 {
        if remaining_n == 0 {
            break;
        }
        let q = (probs[i] / remaining_p).clamp(0.0, 1.0);
        let k = binomial(rng, remaining_n, q);
        out[i] = k;
        remaining_n -= k;
        remaining_p = (remaining_p - probs[i]).max(0.0);
    }
    out[3] = remaining_n;
    out
}
