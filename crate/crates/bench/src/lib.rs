//! Shared fixtures for the benchmarks in `benches/`.

use maj3_core::formula::sample_hard;
use maj3_core::HardInput;

/// `n` hard inputs of height `h` from a fixed stream.
pub fn hard_inputs<R: rand::Rng>(h: u32, n: usize, rng: &mut R) -> Vec<HardInput> {
    (0..n).map(|_| sample_hard(h, None, rng).expect("height within cap")).collect()
}
