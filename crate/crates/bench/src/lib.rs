//! Deterministic inputs shared by the benchmarks.

use std::f64::consts::TAU;

use tsmorph_core::TimeSeries;

/// A weekly cycle plus a slower wobble and a small xorshift jitter.
pub fn wave(len: usize, seed: u64) -> TimeSeries {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let phase = (seed % 7) as f64;
    let values = (0..len)
        .map(|t| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let jitter = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            let x = t as f64;
            (TAU * x / 7.0 + phase).sin() + 0.5 * (TAU * x / 90.0).cos() + 0.3 * jitter
        })
        .collect();
    TimeSeries::new(values).expect("finite").with_id(format!("wave_{seed}"))
}

pub fn corpus(count: usize, len: usize) -> Vec<TimeSeries> {
    (0..count as u64).map(|s| wave(len, s + 1)).collect()
}
