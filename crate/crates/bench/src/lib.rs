//! Shared fixtures for the benchmarks in `benches/`.

use svcauction_core::{generate_instance, NetworkInstance, ScenarioConfig};

/// Reference-scale instance for `seed`.
pub fn reference_instance(seed: u64) -> NetworkInstance {
    generate_instance(&ScenarioConfig::reference().with_seed(seed)).expect("reference config is valid")
}

/// Instance small enough for exact welfare maximization.
pub fn tiny_instance(seed: u64) -> NetworkInstance {
    generate_instance(&ScenarioConfig::tiny().with_seed(seed)).expect("tiny config is valid")
}
