//! Run configuration documents.
//!
//! One JSON file carries every structured input. Each subcommand reads the
//! blocks it needs; unknown keys anywhere are rejected.

use std::path::Path;

use chargeq_core::params::DEFAULT_CHARGING_RATIO;
use chargeq_core::{
    CalibrationOptions, ChainArray, ChargeQubitParams, CouplerParams, EvolutionPath, NoiseSpectrum, QubitNoiseProfile,
    Topology, VariationSpec,
};
use serde::Deserialize;

use crate::exit::Failure;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub array: Option<ArrayConfig>,
    #[serde(default)]
    pub calibration: CalibrationOptions,
    pub generate: Option<GenerateConfig>,
    pub verify: Option<VerifyConfig>,
    pub decohere: Option<DecohereConfig>,
    pub sweep: Option<SweepConfig>,
    pub bench: Option<BenchConfig>,
}

/// Physical array definition.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    pub topology: Topology,
    pub n: Option<usize>,
    /// Shared by every qubit unless `qubits` is given.
    pub qubit: Option<ChargeQubitParams>,
    pub qubits: Option<Vec<ChargeQubitParams>>,
    /// Shared by every bond (chain) or the single inductance.
    pub coupler: Option<CouplerParams>,
    pub couplers: Option<Vec<CouplerParams>>,
    #[serde(default = "default_charging_ratio")]
    pub min_charging_ratio: f64,
}

fn default_charging_ratio() -> f64 {
    DEFAULT_CHARGING_RATIO
}

/// Resolved array: explicit per-qubit and per-coupler lists.
#[derive(Debug, Clone)]
pub struct Array {
    pub topology: Topology,
    pub qubits: Vec<ChargeQubitParams>,
    pub couplers: Vec<CouplerParams>,
}

impl ArrayConfig {
    pub fn resolve(&self) -> Result<Array, Failure> {
        let qubits = match (&self.qubit, &self.qubits) {
            (Some(q), None) => {
                let n = self
                    .n
                    .ok_or_else(|| Failure::config("array.n", "required with `qubit`"))?;
                vec![*q; n]
            }
            (None, Some(list)) => {
                if let Some(n) = self.n.filter(|&n| n != list.len()) {
                    return Err(Failure::config(
                        "array.n",
                        format!("{n} disagrees with {} qubits", list.len()),
                    ));
                }
                list.clone()
            }
            _ => return Err(Failure::config("array", "give exactly one of `qubit` and `qubits`")),
        };
        let n = qubits.len();
        if n < 2 {
            return Err(Failure::config("array.n", "an array needs at least two qubits"));
        }
        for (i, q) in qubits.iter().enumerate() {
            q.validate(self.min_charging_ratio)
                .map_err(|e| Failure::config(format!("array.qubits[{i}]"), e.to_string()))?;
        }
        let wanted = match self.topology {
            Topology::Chain => n - 1,
            Topology::CommonInductance => 1,
        };
        let couplers = match (&self.coupler, &self.couplers) {
            (Some(c), None) => vec![*c; wanted],
            (None, Some(list)) if list.len() == wanted => list.clone(),
            (None, Some(list)) => {
                return Err(Failure::config(
                    "array.couplers",
                    format!("expected {wanted} couplers, got {}", list.len()),
                ))
            }
            _ => return Err(Failure::config("array", "give exactly one of `coupler` and `couplers`")),
        };
        for (i, c) in couplers.iter().enumerate() {
            c.validate()
                .map_err(|e| Failure::config(format!("array.couplers[{i}]"), e.to_string()))?;
            let fits = matches!(
                (self.topology, c),
                (Topology::Chain, CouplerParams::LargeJj { .. })
                    | (Topology::CommonInductance, CouplerParams::CommonInductance { .. })
            );
            if !fits {
                return Err(Failure::config(
                    format!("array.couplers[{i}].variant"),
                    "coupler variant does not match the topology",
                ));
            }
        }
        Ok(Array {
            topology: self.topology,
            qubits,
            couplers,
        })
    }
}

impl Array {
    pub fn chain(&self) -> ChainArray {
        ChainArray {
            qubits: self.qubits.clone(),
            couplers: self.couplers.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    pub n: usize,
    pub topology: Topology,
    pub steps: usize,
    /// Number of `2π` periods covered by the grid.
    #[serde(default = "one")]
    pub periods: usize,
    /// Ising strength in rad/ns; the curve is in `gt` so it only sets the clock.
    #[serde(default = "default_g")]
    pub g: f64,
}

fn one() -> usize {
    1
}

fn default_g() -> f64 {
    4.0 * std::f64::consts::PI
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "two")]
    pub n_min: usize,
    #[serde(default = "ten")]
    pub n_max: usize,
    #[serde(default = "both_topologies")]
    pub topologies: Vec<Topology>,
    /// Random states per `N` for the periodicity check.
    #[serde(default = "ten")]
    pub random_states: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n_min: 2,
            n_max: 10,
            topologies: both_topologies(),
            random_states: 10,
            seed: 0,
        }
    }
}

fn two() -> usize {
    2
}

fn ten() -> usize {
    10
}

fn both_topologies() -> Vec<Topology> {
    vec![Topology::Chain, Topology::CommonInductance]
}

/// Where the decoherence inputs come from. Exactly one source is used:
/// `t2_ns` (uniform per-qubit `T₂`), `profiles`, or the calibrated `array`
/// together with `spectrum`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecohereConfig {
    pub spectrum: Option<NoiseSpectrum>,
    pub profiles: Option<Vec<QubitNoiseProfile>>,
    /// `ε/Ē` applied to every qubit; otherwise `ε` follows from `n_g`.
    pub epsilon_ratio: Option<f64>,
    pub t2_ns: Option<f64>,
    pub n: Option<usize>,
    /// Generation time for the headline ratio; defaults to the calibrated `π/g`.
    pub t_s_ns: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTarget {
    Chain,
    CommonInductance,
    T2,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: SweepTarget,
    #[serde(default)]
    pub variation: VariationSpec,
    #[serde(default = "yes")]
    pub with_bias: bool,
    #[serde(default)]
    pub path: EvolutionPath,
    /// T₂ sweeps: spectrum and `ε/Ē` for the profiles built from `array`.
    pub spectrum: Option<NoiseSpectrum>,
    #[serde(default = "default_epsilon_ratio")]
    pub epsilon_ratio: f64,
}

fn yes() -> bool {
    true
}

fn default_epsilon_ratio() -> f64 {
    0.01
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default = "two")]
    pub n_min: usize,
    #[serde(default = "ten")]
    pub n_max: usize,
    #[serde(default = "three")]
    pub repeats: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            n_min: 2,
            n_max: 10,
            repeats: 3,
        }
    }
}

fn three() -> usize {
    3
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config("<file>", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Failure::config(path, e.into_inner().to_string())
        })
    }

    pub fn array(&self) -> Result<Array, Failure> {
        self.array
            .as_ref()
            .ok_or_else(|| Failure::config("array", "missing block"))?
            .resolve()
    }
}
