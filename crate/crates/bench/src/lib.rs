//! Workloads shared by the criterion benchmarks.

use picsim_core::random::{random_recipe, RandomOptions};
use picsim_core::reference::{mzi_chain, MziOptions};
use picsim_core::{wavelength_to_frequency, FrequencyGrid, Subcircuit};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Uniform frequency grid over 1500–1600 nm.
pub fn band(points: usize) -> FrequencyGrid {
    FrequencyGrid::linspace(wavelength_to_frequency(1.6e-6), wavelength_to_frequency(1.5e-6), points)
        .expect("valid band")
}

pub fn chain(count: usize) -> Subcircuit {
    mzi_chain(count, &MziOptions::default(), picsim_core::benchmark::LINK_LENGTH).expect("valid chain")
}

/// Seeded random circuits of up to eight components.
pub fn random_circuits(count: usize, seed: u64) -> Vec<Subcircuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_recipe(&mut rng, &RandomOptions::default()).build().expect("valid recipe"))
        .collect()
}
