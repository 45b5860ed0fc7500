//! Seeded pseudo-random source with a fixed, documented algorithm.
//!
//! The generator is SplitMix64 (Steele, Lea & Flood 2014): state advances by
//! the 64-bit golden-ratio constant and each output is a finalized mix of the
//! state. The algorithm is part of the external contract: identical seeds
//! produce identical sequences on every platform and can be reproduced in any
//! language in a dozen lines, which keeps result files comparable across
//! implementations.

/// Deterministic 64-bit generator. Single-owner: parallel callers must use
/// independently seeded sources (see [`derive_seed`]).
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    state: u64,
}

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource { seed, state: seed }
    }

    /// The seed this source was constructed with.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Next raw 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix(self.state)
    }

    /// Uniform draw in `[0, 1)` using the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased uniform draw in `[0, n)` by rejection sampling.
    ///
    /// Panics when `n == 0`.
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "next_below requires n > 0");
        if n.is_power_of_two() {
            return self.next_u64() & (n - 1);
        }
        // Reject draws from the final partial block of size 2^64 mod n.
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }

    pub fn next_usize(&mut self, n: usize) -> usize {
        self.next_below(n as u64) as usize
    }

    /// Standard normal draw via Box-Muller; consumes two uniforms per call.
    pub fn next_normal(&mut self) -> f64 {
        // Shift into (0, 1] so the logarithm is finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// A new source whose seed is a mix of this source's seed and `stream`,
    /// without consuming any output. Used to hand independent streams to
    /// parallel workers.
    pub fn derive(&self, stream: u64) -> RandomSource {
        RandomSource::new(mix(self.seed.wrapping_add(GAMMA).wrapping_add(mix(stream))))
    }
}

/// Deterministic per-cell seed from a global seed and a list of tags
/// (FNV-1a over the tag bytes, finalized with the SplitMix64 mixer).
///
/// The pipeline derives one seed per (subject, strategy, K) cell this way so
/// parallel and serial sweeps produce identical tables.
pub fn derive_seed(global: u64, tags: &[&str]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for tag in tags {
        for &b in tag.as_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01B3);
        }
        // Separator so ("ab","c") != ("a","bc").
        h ^= 0xFF;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    mix(global.wrapping_add(GAMMA) ^ h)
}
