//! Counter-based randomness: every draw is a pure function of
//! `(seed, stream, a, b, c)`, so parallel scheduling order cannot affect
//! results and any draw can be replayed in isolation.

/// Distinct streams keep draws for different purposes independent.
#[derive(Debug, Clone, Copy)]
pub enum Stream {
    WorkerValue = 1,
    ReferralCoin = 2,
    ReferralTarget = 3,
    OfferAccept = 4,
    ThresholdMix = 5,
    PoolShuffle = 6,
    InitialMatch = 7,
}

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Keyed 64-bit value: two finalizer rounds over the mixed key words.
#[inline]
pub fn key(seed: u64, stream: Stream, a: u64, b: u64, c: u64) -> u64 {
    let mut z = splitmix(seed ^ (stream as u64).wrapping_mul(0xd6e8_feb8_6659_fd93));
    z = splitmix(z ^ a.wrapping_mul(0xa076_1d64_78bd_642f));
    z = splitmix(z ^ b.wrapping_mul(0xe703_7ed1_a0b4_28db));
    splitmix(z ^ c.wrapping_mul(0x8ebc_6af0_9c88_c6e3))
}

/// Uniform in `[0, 1)` with 53 random bits.
#[inline]
pub fn uniform(seed: u64, stream: Stream, a: u64, b: u64, c: u64) -> f64 {
    (key(seed, stream, a, b, c) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform integer in `[0, n)` by 128-bit multiply-shift.
#[inline]
pub fn below(seed: u64, stream: Stream, a: u64, b: u64, c: u64, n: u64) -> u64 {
    debug_assert!(n > 0);
    ((key(seed, stream, a, b, c) as u128 * n as u128) >> 64) as u64
}

#[inline]
pub fn bernoulli(seed: u64, stream: Stream, a: u64, b: u64, c: u64, p: f64) -> bool {
    uniform(seed, stream, a, b, c) < p
}

/// Keyed Fisher-Yates shuffle; the swap at position `i` uses counter `i`, so
/// the permutation is a pure function of `(seed, stream, a)`.
pub fn shuffle<T>(items: &mut [T], seed: u64, stream: Stream, a: u64) {
    for i in (1..items.len()).rev() {
        let j = below(seed, stream, a, i as u64, 0, i as u64 + 1) as usize;
        items.swap(i, j);
    }
}
