//! Counter-based noise streams: every draw is a pure function of the seed
//! and its coordinates, so spectra can be computed in any order.

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of a seed and a sequence of counters.
#[inline]
pub fn hash_counters(seed: u64, counters: &[u64]) -> u64 {
    counters.iter().fold(splitmix64(seed), |h, &c| {
        splitmix64(h ^ c.wrapping_mul(0xD6E8_FEB8_6659_FD93))
    })
}

/// Uniform draw in the open interval (0, 1).
#[inline]
pub fn uniform(seed: u64, counters: &[u64]) -> f64 {
    let bits = hash_counters(seed, counters) >> 11;
    (bits as f64 + 0.5) / (1u64 << 53) as f64
}

/// Unit-mean exponential draw: the power of a circular complex Gaussian
/// noise sample.
#[inline]
pub fn exponential(seed: u64, counters: &[u64]) -> f64 {
    -uniform(seed, counters).ln()
}
