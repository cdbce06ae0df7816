//! Shared fixtures for the benchmarks.

use karel_core::datagen::{demo_world, sample_program};
use karel_core::{GenConfig, Program, WorldState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `n` raw generator programs paired with a demo world each.
pub fn workload(n: usize, seed: u64) -> Vec<(Program, WorldState)> {
    let cfg = GenConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let p = sample_program(&mut rng, &cfg);
            (p, demo_world(&mut rng, &cfg))
        })
        .collect()
}
