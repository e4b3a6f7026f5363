//! Deterministic randomness plumbing.
//!
//! Two kinds of generators are used, both fully determined by explicit seeds:
//!
//! * [`campaign_rng`] — a ChaCha8 stream for instance-level sampling (random
//!   Gram matrices, starting configurations). Sub-experiments derive their
//!   seeds with [`derive_seed`] so adding a consumer never shifts another
//!   consumer's stream.
//! * [`SampleStream`] — a counter-based stream for Monte Carlo integration.
//!   Sample `i` is generated from `(seed, i)` alone, so the integral value is
//!   independent of batching and identical on every rerun.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One step of the splitmix64 sequence.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a digest of a byte string, used for input digests and order hashes.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Derives a sub-seed from a root seed and a textual label.
pub fn derive_seed(root: u64, label: &str) -> u64 {
    let mut state = root ^ fnv1a(label.as_bytes());
    splitmix64(&mut state)
}

/// Instance-level generator for a given seed.
pub fn campaign_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in the open interval (0, 1).
pub fn unit_open(rng: &mut ChaCha8Rng) -> f64 {
    use rand_chacha::rand_core::RngCore;
    (((rng.next_u64() >> 11) as f64) + 0.5) * (1.0 / 9007199254740992.0)
}

/// Standard normal draw via Box-Muller on the campaign generator.
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = unit_open(rng);
    let u2 = unit_open(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Counter-based per-sample stream: state depends only on `(seed, index)`.
pub struct SampleStream {
    state: u64,
}

impl SampleStream {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut s = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        // One warm-up step decorrelates neighbouring counters.
        splitmix64(&mut s);
        Self { state: s }
    }

    pub fn next_u64(&mut self) -> u64 {
        splitmix64(&mut self.state)
    }

    /// Uniform in (0, 1).
    pub fn unit_open(&mut self) -> f64 {
        (((self.next_u64() >> 11) as f64) + 0.5) * (1.0 / 9007199254740992.0)
    }

    /// A pair of independent standard normals (Box-Muller).
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.unit_open();
        let u2 = self.unit_open();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        (r * c, r * s)
    }
}
