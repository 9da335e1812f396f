//! Deterministic random number generation.
//!
//! Everything stochastic in this crate draws from [`Rng`], a xoshiro256**
//! generator seeded through SplitMix64. Both algorithms are public-domain
//! reference designs with published test vectors, so any language can
//! replay a stream given the seed. The concrete draw rules below are part
//! of the reproducibility contract:
//!
//! * `next_f64` takes the top 53 bits of `next_u64`, giving a uniform
//!   value in `[0, 1)`.
//! * `next_normal` consumes exactly two uniforms per call (Box–Muller,
//!   cosine branch); nothing is cached between calls.
//! * `uniform_usize(n)` is `next_u64() % n`. The modulo bias is below
//!   2^-44 for every `n` used here and irrelevant next to replayability.
//! * Named sub-streams come from [`derive_seed`]: FNV-1a over the label,
//!   folded into the parent seed and finalized with the SplitMix64 mixer.
//!   Day-level streams use the label `day-<doy>`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::math;

/// SplitMix64 state-advance and output mix (Steele, Lea & Flood 2014).
#[inline]
fn splitmix64_next(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a textual label.
///
/// FNV-1a hashes the label, the result is XORed into the parent and run
/// once through the SplitMix64 mixer. Distinct labels give statistically
/// independent streams; the rule is stable across platforms and releases.
pub fn derive_seed(parent: u64, label: &str) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf29ce484222325;
    const FNV_PRIME: u64 = 0x100000001b3;
    let mut h = FNV_OFFSET;
    for byte in label.as_bytes() {
        h ^= u64::from(*byte);
        h = h.wrapping_mul(FNV_PRIME);
    }
    let mut state = parent ^ h;
    splitmix64_next(&mut state)
}

/// Convenience for indexed sub-streams such as per-day generators.
pub fn derive_seed_indexed(parent: u64, label: &str, index: u64) -> u64 {
    let mut full = String::from(label);
    full.push('-');
    // u64 to decimal without std.
    let mut digits = [0u8; 20];
    let mut n = index;
    let mut len = 0;
    loop {
        digits[len] = b'0' + (n % 10) as u8;
        n /= 10;
        len += 1;
        if n == 0 {
            break;
        }
    }
    for i in (0..len).rev() {
        full.push(digits[i] as char);
    }
    derive_seed(parent, &full)
}

/// xoshiro256** generator (Blackman & Vigna 2018).
#[derive(Debug, Clone)]
pub struct Rng {
    s: [u64; 4],
}

impl Rng {
    /// Seed the four state words with consecutive SplitMix64 outputs, the
    /// initialization recommended by the xoshiro authors.
    pub fn from_seed(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64_next(&mut sm),
            splitmix64_next(&mut sm),
            splitmix64_next(&mut sm),
            splitmix64_next(&mut sm),
        ];
        Rng { s }
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `[0, n)`. `n` must be nonzero.
    pub fn uniform_usize(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// Standard normal draw via Box–Muller, cosine branch.
    ///
    /// Consumes exactly two uniforms; `1 - u` keeps the log argument
    /// strictly positive.
    pub fn next_normal(&mut self) -> f64 {
        let u1 = self.next_f64();
        let u2 = self.next_f64();
        math::sqrt(-2.0 * math::ln(1.0 - u1)) * math::cos(2.0 * math::PI * u2)
    }

    /// In-place Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.uniform_usize(i + 1);
            xs.swap(i, j);
        }
    }

    /// A seeded permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        self.shuffle(&mut idx);
        idx
    }
}
