//! Shared fixtures for the criterion benchmarks.

use ontochain::{ChainConfig, Complex64, OntState, QState, SparseVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded uniform basis indices for `num_spins` sites.
pub fn sample_indices(num_spins: usize, count: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random_range(0..1u64 << num_spins)).collect()
}

/// Equal-weight superposition over `branches` sampled basis states.
pub fn sample_state(config: &ChainConfig, branches: usize, seed: u64) -> QState {
    let pairs = sample_indices(config.num_spins(), branches, seed)
        .into_iter()
        .map(|k| (k, Complex64::new(1.0, 0.0)));
    let v = SparseVector::from_pairs(config.num_spins(), pairs).expect("indices fit");
    QState::normalized(&v).expect("nonzero state")
}

pub fn sample_ont_states(config: &ChainConfig, count: usize, seed: u64) -> Vec<OntState> {
    sample_indices(config.num_spins(), count, seed)
        .into_iter()
        .map(|k| OntState::from_index(config.num_spins(), k).expect("index fits"))
        .collect()
}
