//! Simulation and calibration of one-step cluster-state generation in
//! superconducting charge-qubit arrays.
//!
//! Two array layouts are covered: a chain of qubits joined by large
//! Josephson junctions (nearest-neighbour Ising coupling) and qubits sharing
//! a common inductance (all-to-all coupling). The crate computes couplings
//! from circuit parameters, solves the calibration conditions, evolves the
//! state vector, scores the result against the closed-form cluster states and
//! estimates decoherence times.
//!
//! Units: energies are `E/h` in GHz, times in ns, `g` and angular frequencies
//! in rad/ns, fluxes in units of `Φ₀`.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod model;
pub mod noise;
pub mod params;
pub mod quadrature;
pub mod roots;
pub mod states;
pub mod sweep;
pub mod units;

pub use engine::{Basis, Guards, MeasurementRecord, StateSnapshot, StateVector};
pub use error::{Error, Result};
pub use model::{IsingXModel, Kernel, Pauli, PauliTerm, ProjectorSign};
pub use noise::{DecayTime, NoiseSpectrum, QubitNoiseProfile, QubitRates};
pub use params::{CalibrationMode, CalibrationOptions, CalibrationResult, ChargeQubitParams, CouplerParams, Topology};
pub use states::{EntropyBase, XConfigAmplitudeRule};
pub use sweep::{ChainArray, Distribution, EvolutionPath, SweepKind, SweepOptions, SweepReport, VariationSpec};
