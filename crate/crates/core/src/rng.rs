//! Counter-based deterministic randomness.
//!
//! Every draw is a pure function of `(key, counter)`, so results never depend
//! on evaluation order or thread scheduling.

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a key with a counter into a well-distributed 64-bit word.
#[inline]
pub fn mix(key: u64, counter: u64) -> u64 {
    splitmix64(key ^ splitmix64(counter.wrapping_add(0x632B_E59B_D9B4_E019)))
}

/// Uniform draw in `[0, 1)` from the top 53 bits of `mix(key, counter)`.
#[inline]
pub fn unit(key: u64, counter: u64) -> f64 {
    (mix(key, counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
