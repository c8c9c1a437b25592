//! Keyed counter-mode randomness.
//!
//! Every random quantity in the model is a pure function of the 64-bit seed
//! and a tuple of counter words, so an infinite lattice can be evaluated
//! lazily in any order. The mixer is the SplitMix64 finalizer applied in a
//! sponge over the counter words; it is fast and passes the uniformity checks
//! in this crate's tests, but it is not cryptographic.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Domain tags keep the streams used for different purposes disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    EdgeNoise = 1,
    HorizontalDigits = 2,
    VerticalDigits = 3,
    Sampling = 4,
}

#[inline(always)]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash `words` under `key`. Distinct word tuples give unrelated outputs.
#[inline]
pub fn keyed(key: u64, domain: Domain, words: &[u64]) -> u64 {
    let mut h = mix64(key.wrapping_add(GOLDEN) ^ (domain as u64).wrapping_mul(GOLDEN));
    for (i, &w) in words.iter().enumerate() {
        let salted = w.wrapping_add((i as u64 + 1).wrapping_mul(GOLDEN));
        h = mix64(h ^ mix64(salted));
    }
    h
}

/// Top 53 bits mapped to `[0, 1)`.
#[inline(always)]
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Sequential stream over a keyed counter; used for sampling trial inputs.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    stream: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(key: u64, stream: u64) -> Self {
        Self {
            key,
            stream,
            counter: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let out = keyed(self.key, Domain::Sampling, &[self.stream, self.counter]);
        self.counter += 1;
        out
    }

    pub fn next_f64(&mut self) -> f64 {
        unit_f64(self.next_u64())
    }

    /// Uniform integer in `[lo, hi)`.
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo < hi);
        let span = (hi as i128 - lo as i128) as u128;
        let r = ((self.next_u64() as u128 * span) >> 64) as i128;
        (lo as i128 + r) as i64
    }

    pub fn index(&mut self, len: usize) -> usize {
        self.range_i64(0, len as i64) as usize
    }
}
