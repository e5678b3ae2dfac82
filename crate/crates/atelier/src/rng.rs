//! Deterministic 64-bit random number generation.
//!
//! Everything in this crate that consumes randomness goes through
//! [`SplitMix64`], so identical seeds produce identical artworks on every
//! platform. The generator is the splitmix64 recurrence:
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! output = z ^ (z >> 31)
//! ```
//!
//! All arithmetic is wrapping 64-bit; floats are derived from the top 53
//! bits, so results do not depend on platform float quirks.

/// Deterministic splitmix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Next 64 random bits.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        mix64(self.state)
    }

    /// Uniform float in `[0, 1)` built from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`. `n` must be nonzero.
    ///
    /// Plain modulo; the bias is negligible for the small `n` used here
    /// and the result is identical everywhere.
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        self.next_u64() % n
    }
}

/// splitmix64 finalizer, usable as a standalone avalanche hash.
pub fn mix64(x: u64) -> u64 {
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a base seed with up to three stream tags into a derived seed.
///
/// Used to give independent deterministic streams to e.g. each primitive
/// and pass of the sketch filter.
pub fn derive_seed(base: u64, a: u64, b: u64, c: u64) -> u64 {
    mix64(base ^ mix64(a ^ mix64(b ^ mix64(c))))
}
