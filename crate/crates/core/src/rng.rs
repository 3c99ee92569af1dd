//! Deterministic pseudorandom streams.
//!
//! The whole crate draws randomness from [`SplitMix64`], a fixed 64-bit
//! generator (Steele, Lea, Flood 2014). Streams for independent units of work
//! (trials, restarts, graph generation) are derived from a master seed with
//! [`derive_seed`], so results never depend on execution order or thread
//! count. Both functions are part of the reproducibility contract and must
//! not change.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer: a bijective mixer on 64-bit words.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed for a sub-stream from a master seed and a tag path.
///
/// `derive_seed(master, &[a, b])` and `derive_seed(master, &[a, c])` are
/// independent for `b != c`; each derivation step is injective in its tag.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut s = mix64(master.wrapping_add(GOLDEN_GAMMA));
    for &t in tags {
        s = mix64(s.wrapping_add(GOLDEN_GAMMA).wrapping_add(mix64(t)));
    }
    s
}

/// SplitMix64 generator state.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Stream for unit of work `tags` under `master`; see [`derive_seed`].
    pub fn stream(master: u64, tags: &[u64]) -> Self {
        SplitMix64::new(derive_seed(master, tags))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform on `(0, 1]`; safe as an argument to `ln`.
    #[inline]
    pub fn next_f64_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard exponential via inversion.
    #[inline]
    pub fn next_exp(&mut self) -> f64 {
        -self.next_f64_open().ln()
    }

    /// Fair coin.
    #[inline]
    pub fn next_bool(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    /// Unbiased uniform integer in `[0, n)` (Lemire's method with rejection).
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        let mut x = self.next_u64();
        let mut m = (x as u128) * (n as u128);
        let mut lo = m as u64;
        if lo < n {
            let threshold = n.wrapping_neg() % n;
            while lo < threshold {
                x = self.next_u64();
                m = (x as u128) * (n as u128);
                lo = m as u64;
            }
        }
        (m >> 64) as u64
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            xs.swap(i, j);
        }
    }
}
