//! Shared fixtures for the evolution benchmarks.

use std::f64::consts::PI;

use chargeq_core::engine;
use chargeq_core::model::{self, IsingXModel};
use chargeq_core::StateVector;

/// Ising strength used by every fixture; `t = π/G` is one generation run.
pub const G: f64 = 4.0 * PI;

/// Chain model and the `|0…0⟩` input for `n` qubits.
pub fn chain_fixture(n: usize) -> (IsingXModel, StateVector) {
    let m = model::build_chain(n, G).expect("valid chain");
    let s0 = engine::initial_all_zero(n).expect("valid size");
    (m, s0)
}

/// Generation time `π/g`.
pub fn generation_time() -> f64 {
    PI / G
}
