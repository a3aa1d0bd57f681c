//! Monte Carlo robustness studies under fabrication spread.
//!
//! Every sample draws its parameters from its own ChaCha stream
//! `(seed, sample index)`, so serial and parallel runs see identical draws.
//! Qubits stay at the degeneracy point, so a miscalibrated array still has
//! an x-only Hamiltonian and the Walsh-diagonal path remains exact for large
//! arrays.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{self, Guards};
use crate::error::{Error, Result};
use crate::model;
use crate::noise::{self, QubitNoiseProfile};
use crate::params::{self, CalibrationMode, CalibrationOptions, ChargeQubitParams, CouplerParams};
use crate::states;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    /// Normal, truncated at ±3σ.
    #[default]
    Gaussian,
    /// Uniform with the same standard deviation, `±√3σ`.
    Uniform,
}

/// Relative spreads of the fabricated parameters and the sampling setup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariationSpec {
    pub e_j: f64,
    pub e_j0: f64,
    pub inductance: f64,
    pub distribution: Distribution,
    pub samples: usize,
    pub seed: u64,
}

impl Default for VariationSpec {
    fn default() -> Self {
        Self {
            e_j: 0.0,
            e_j0: 0.0,
            inductance: 0.0,
            distribution: Distribution::Gaussian,
            samples: 100,
            seed: 0,
        }
    }
}

impl VariationSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("e_j", self.e_j), ("e_j0", self.e_j0), ("inductance", self.inductance)] {
            if !(0.0..=0.5).contains(&v) {
                return Err(Error::domain(format!("relative spread {name} = {v} outside [0, 0.5]")));
            }
        }
        if self.samples == 0 {
            return Err(Error::domain("a sweep needs at least one sample"));
        }
        Ok(())
    }

    fn rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }

    /// Multiplicative factor `1 + σ·z`.
    fn factor<R: Rng>(&self, rng: &mut R, sigma: f64) -> f64 {
        let z = match self.distribution {
            Distribution::Gaussian => loop {
                let z: f64 = rng.sample(StandardNormal);
                if z.abs() <= 3.0 {
                    break z;
                }
            },
            Distribution::Uniform => rng.gen_range(-1.0..=1.0) * 3f64.sqrt(),
        };
        1.0 + sigma * z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Chain,
    CommonInductance,
    T2,
}

/// Which evolution routine a sweep uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionPath {
    /// Dense for up to 10 qubits, Walsh-diagonal above.
    #[default]
    Auto,
    Dense,
    Diagonal,
}

const AUTO_DENSE_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    /// Drawn Josephson energies (GHz) of the qubits.
    pub e_j: Vec<f64>,
    /// Drawn coupler parameter per coupler: `E_J0` (GHz) for a chain, a
    /// single inductance (nH) for a common inductance.
    pub coupler: Vec<f64>,
    /// True when every calibration condition met its tolerance.
    pub calibrated: bool,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub achieved_g: Option<f64>,
    pub t_s: Option<f64>,
    pub fidelity: Option<f64>,
    pub t2_ns: Option<f64>,
    pub error: Option<String>,
}

impl SampleRecord {
    fn new(index: usize, e_j: Vec<f64>, coupler: Vec<f64>) -> Self {
        Self {
            index,
            e_j,
            coupler,
            calibrated: false,
            residuals: Vec::new(),
            max_residual: f64::NAN,
            achieved_g: None,
            t_s: None,
            fidelity: None,
            t2_ns: None,
            error: None,
        }
    }
}

/// Order statistics of one sampled quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std_dev: f64,
    /// `std_dev/mean`.
    pub cv: f64,
    pub q01: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
    pub q99: f64,
}

impl Stats {
    /// `None` for an empty sample.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = if v.len() > 1 {
            v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        // linear interpolation between order statistics
        let q = |p: f64| {
            let pos = p * (n - 1.0);
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        let std_dev = var.sqrt();
        Some(Self {
            count: v.len(),
            min: v[0],
            max: v[v.len() - 1],
            mean,
            std_dev,
            cv: if mean != 0.0 { std_dev / mean.abs() } else { 0.0 },
            q01: q(0.01),
            q05: q(0.05),
            q50: q(0.5),
            q95: q(0.95),
            q99: q(0.99),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub kind: SweepKind,
    pub n_qubits: usize,
    pub variation: VariationSpec,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub with_bias: Option<bool>,
    pub samples: Vec<SampleRecord>,
    /// Samples whose calibration did not meet tolerance (they are still
    /// evolved when settings exist).
    pub calibration_failures: usize,
    /// Samples that produced no metric at all.
    pub errors: usize,
    pub fidelity: Option<Stats>,
    pub t2_ns: Option<Stats>,
}

impl SweepReport {
    fn assemble(
        kind: SweepKind,
        n_qubits: usize,
        variation: VariationSpec,
        with_bias: Option<bool>,
        samples: Vec<SampleRecord>,
    ) -> Self {
        let fids: Vec<f64> = samples.iter().filter_map(|s| s.fidelity).collect();
        let t2s: Vec<f64> = samples.iter().filter_map(|s| s.t2_ns).collect();
        Self {
            kind,
            n_qubits,
            variation,
            with_bias,
            calibration_failures: samples.iter().filter(|s| !s.calibrated).count(),
            errors: samples
                .iter()
                .filter(|s| s.error.is_some() && s.fidelity.is_none() && s.t2_ns.is_none())
                .count(),
            fidelity: Stats::from_values(&fids),
            t2_ns: Stats::from_values(&t2s),
            samples,
        }
    }
}

/// Nominal chain: `N` qubits and `N − 1` large-junction couplers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainArray {
    pub qubits: Vec<ChargeQubitParams>,
    pub couplers: Vec<CouplerParams>,
}

impl ChainArray {
    pub fn uniform(n: usize, qubit: ChargeQubitParams, coupler: CouplerParams) -> Self {
        Self {
            qubits: vec![qubit; n],
            couplers: vec![coupler; n.saturating_sub(1)],
        }
    }
}

/// Options shared by the fidelity sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub calibration: CalibrationOptions,
    pub path: EvolutionPath,
    pub guards: Guards,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            calibration: CalibrationOptions::default(),
            path: EvolutionPath::Auto,
            guards: Guards::default(),
        }
    }
}

fn evolve_fidelity(
    terms: &[model::PauliTerm],
    n: usize,
    t: f64,
    target: &engine::StateVector,
    opts: &SweepOptions,
) -> Result<f64> {
    let s0 = engine::initial_all_zero(n)?;
    let dense = match opts.path {
        EvolutionPath::Dense => true,
        EvolutionPath::Diagonal => false,
        EvolutionPath::Auto => n <= AUTO_DENSE_LIMIT || !model::is_x_diagonal(terms),
    };
    let out = if dense {
        engine::evolve_dense_with(&s0, terms, t, &opts.guards)?
    } else {
        engine::evolve_x_terms_with(&s0, terms, t, &opts.guards)?
    };
    Ok(states::fidelity(&out, target)?.min(1.0))
}

fn chain_sample(
    nominal: &ChainArray,
    v: &VariationSpec,
    opts: &SweepOptions,
    target: &engine::StateVector,
    index: usize,
) -> SampleRecord {
    let mut rng = v.rng(index);
    let qubits: Vec<ChargeQubitParams> = nominal
        .qubits
        .iter()
        .map(|q| q.with_josephson_energy(q.josephson_energy * v.factor(&mut rng, v.e_j)))
        .collect();
    let couplers: Vec<CouplerParams> = nominal
        .couplers
        .iter()
        .map(|c| {
            let f = v.factor(&mut rng, v.e_j0);
            match *c {
                CouplerParams::LargeJj { e_j0, bias_ratio } => CouplerParams::LargeJj {
                    e_j0: e_j0 * f,
                    bias_ratio,
                },
                other => other,
            }
        })
        .collect();
    let mut rec = SampleRecord::new(
        index,
        qubits.iter().map(|q| q.josephson_energy).collect(),
        couplers
            .iter()
            .map(|c| match c {
                CouplerParams::LargeJj { e_j0, .. } => *e_j0,
                CouplerParams::CommonInductance { inductance_nh, .. } => *inductance_nh,
            })
            .collect(),
    );
    let cal = match params::calibrate_chain(&qubits, &couplers, &opts.calibration) {
        Ok(c) => {
            rec.calibrated = true;
            c
        }
        Err(Error::Calibration {
            best: Some(best),
            reason,
            ..
        }) => {
            rec.error = Some(reason);
            *best
        }
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    rec.residuals = cal.residuals.clone();
    rec.max_residual = cal.max_residual;
    rec.achieved_g = Some(cal.achieved_g);
    rec.t_s = Some(cal.t_s);
    let result = model::build_physical_chain(&qubits, &couplers, &cal)
        .and_then(|terms| evolve_fidelity(&terms, qubits.len(), cal.t_s, target, opts));
    match result {
        Ok(f) => rec.fidelity = Some(f),
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

/// Draws `E_Ji` and `E_J0` per sample, recalibrates (fluxes only, or fluxes
/// and bias currents), evolves `|0…0⟩` under the resulting physical
/// Hamiltonian for the sample's `π/g`, and scores against `|φ_N⟩`.
pub fn run_chain_sweep(nominal: &ChainArray, v: &VariationSpec, with_bias: bool) -> Result<SweepReport> {
    run_chain_sweep_with(nominal, v, with_bias, &SweepOptions::default())
}

pub fn run_chain_sweep_with(
    nominal: &ChainArray,
    v: &VariationSpec,
    with_bias: bool,
    opts: &SweepOptions,
) -> Result<SweepReport> {
    v.validate()?;
    let n = nominal.qubits.len();
    if n < 2 || nominal.couplers.len() + 1 != n {
        return Err(Error::domain("a chain sweep needs N ≥ 2 qubits and N − 1 couplers"));
    }
    check_guard(n, opts)?;
    let mut opts = *opts;
    opts.calibration.mode = if with_bias {
        CalibrationMode::FluxAndBias
    } else {
        CalibrationMode::FluxOnly
    };
    let target = states::closed_form_chain(n)?;
    let samples: Vec<SampleRecord> = (0..v.samples)
        .into_par_iter()
        .map(|i| chain_sample(nominal, v, &opts, &target, i))
        .collect();
    Ok(SweepReport::assemble(SweepKind::Chain, n, *v, Some(with_bias), samples))
}

fn check_guard(n: usize, opts: &SweepOptions) -> Result<()> {
    let dense = match opts.path {
        EvolutionPath::Dense => true,
        EvolutionPath::Diagonal => false,
        EvolutionPath::Auto => n <= AUTO_DENSE_LIMIT,
    };
    let (limit, what) = if dense {
        (opts.guards.max_dense_qubits, "dense evolution")
    } else {
        (opts.guards.max_diagonal_qubits, "diagonal evolution")
    };
    if n > limit {
        return Err(Error::Resource {
            what,
            requested: n,
            limit,
        });
    }
    Ok(())
}

/// Identical qubits on a common inductance, calibrated once at nominal
/// values; each sample draws `E_Ji` and `L`, keeps the nominal `Φ_e` and
/// `t_s`, and is scored against `|ψ_N⟩`.
pub fn run_common_sweep(
    n: usize,
    qubit: ChargeQubitParams,
    coupler: CouplerParams,
    v: &VariationSpec,
    opts: &SweepOptions,
) -> Result<SweepReport> {
    v.validate()?;
    check_guard(n, opts)?;
    let nominal = vec![qubit; n];
    let cal = params::calibrate_common(&nominal, &coupler)?;
    let flux = cal.fluxes[0];
    let inductance = match coupler {
        CouplerParams::CommonInductance { inductance_nh, .. } => inductance_nh,
        CouplerParams::LargeJj { .. } => return Err(Error::contract("common sweep needs a common_inductance coupler")),
    };
    let target = states::closed_form_longrange(n)?;
    let samples: Vec<SampleRecord> = (0..v.samples)
        .into_par_iter()
        .map(|index| {
            let mut rng = v.rng(index);
            let qubits: Vec<ChargeQubitParams> = nominal
                .iter()
                .map(|q| q.with_josephson_energy(q.josephson_energy * v.factor(&mut rng, v.e_j)))
                .collect();
            let l = inductance * v.factor(&mut rng, v.inductance);
            let mut rec = SampleRecord::new(index, qubits.iter().map(|q| q.josephson_energy).collect(), vec![l]);
            rec.achieved_g = Some(cal.achieved_g);
            rec.t_s = Some(cal.t_s);
            let mut run = || -> Result<f64> {
                let residuals = params::common_residuals(&qubits, l, flux, cal.achieved_g)?;
                rec.max_residual = residuals.iter().copied().fold(0.0, f64::max);
                rec.calibrated = rec.max_residual <= opts.calibration.tolerance;
                rec.residuals = residuals;
                let terms = model::build_physical_common(&qubits, l, flux)?;
                evolve_fidelity(&terms, n, cal.t_s, &target, opts)
            };
            match run() {
                Ok(f) => rec.fidelity = Some(f),
                Err(e) => rec.error = Some(e.to_string()),
            }
            rec
        })
        .collect();
    Ok(SweepReport::assemble(SweepKind::CommonInductance, n, *v, None, samples))
}

/// Cluster `T₂` under `Ē_Ji → Ē_Ji(1 + σz)` with `ε_i` held fixed.
pub fn run_t2_sweep(nominal: &[QubitNoiseProfile], v: &VariationSpec) -> Result<SweepReport> {
    v.validate()?;
    if nominal.is_empty() {
        return Err(Error::domain("a T₂ sweep needs at least one qubit profile"));
    }
    let samples: Vec<SampleRecord> = (0..v.samples)
        .into_par_iter()
        .map(|index| {
            let mut rng = v.rng(index);
            let profiles: Vec<QubitNoiseProfile> = nominal
                .iter()
                .map(|p| QubitNoiseProfile {
                    e_bar: p.e_bar * v.factor(&mut rng, v.e_j),
                    ..*p
                })
                .collect();
            let mut rec = SampleRecord::new(index, profiles.iter().map(|p| p.e_bar).collect(), Vec::new());
            rec.calibrated = true;
            let t2 = profiles
                .iter()
                .map(noise::decoherence_rate)
                .collect::<Result<Vec<f64>>>()
                .and_then(|r| noise::cluster_t2(&r));
            match t2 {
                Ok(t) => rec.t2_ns = t.finite(),
                Err(e) => rec.error = Some(e.to_string()),
            }
            rec
        })
        .collect();
    Ok(SweepReport::assemble(SweepKind::T2, nominal.len(), *v, None, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseSpectrum;

    fn nominal(n: usize) -> ChainArray {
        ChainArray::uniform(
            n,
            ChargeQubitParams::at_degeneracy(100.0, 10.0).unwrap(),
            CouplerParams::large_jj(50.0),
        )
    }

    fn variation(e_j: f64, samples: usize, seed: u64) -> VariationSpec {
        VariationSpec {
            e_j,
            samples,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn spec_validation() {
        assert!(variation(0.6, 1, 0).validate().is_err());
        assert!(variation(0.1, 0, 0).validate().is_err());
        assert!(variation(0.1, 1, 0).validate().is_ok());
    }

    #[test]
    fn draws_are_reproducible_and_truncated() {
        let v = variation(0.2, 1, 42);
        let a: Vec<f64> = (0..500).map(|_| v.factor(&mut v.rng(3), 0.2)).collect();
        let b: Vec<f64> = (0..500).map(|_| v.factor(&mut v.rng(3), 0.2)).collect();
        assert_eq!(a, b);
        let mut rng = v.rng(7);
        for _ in 0..20_000 {
            let f = v.factor(&mut rng, 0.2);
            assert!((0.4..=1.6).contains(&f));
        }
        let u = VariationSpec {
            distribution: Distribution::Uniform,
            ..v
        };
        let mut rng = u.rng(1);
        for _ in 0..10_000 {
            let f = u.factor(&mut rng, 0.1);
            assert!((f - 1.0).abs() <= 0.1 * 3f64.sqrt() + 1e-15);
        }
    }

    #[test]
    fn stats_examples() {
        let s = Stats::from_values(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!((s.min, s.max, s.mean, s.q50), (1.0, 3.0, 2.0, 2.0));
        assert!((s.std_dev - 1.0).abs() < 1e-15);
        assert!(Stats::from_values(&[]).is_none());
    }

    #[test]
    fn zero_spread_is_perfect() {
        let r = run_chain_sweep(&nominal(4), &variation(0.0, 5, 1), true).unwrap();
        assert_eq!(r.samples.len(), 5);
        assert_eq!(r.calibration_failures, 0);
        for s in &r.samples {
            assert!(s.fidelity.unwrap() >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn bias_beats_flux_only_per_seed() {
        let v = variation(0.1, 40, 9);
        let with = run_chain_sweep(&nominal(5), &v, true).unwrap();
        let without = run_chain_sweep(&nominal(5), &v, false).unwrap();
        for (a, b) in with.samples.iter().zip(&without.samples) {
            assert_eq!(a.e_j, b.e_j);
        }
        assert!(with.fidelity.unwrap().min >= 1.0 - 1e-6);
        assert!(with.fidelity.unwrap().mean > without.fidelity.unwrap().mean);
    }

    #[test]
    fn parallel_matches_serial_draws() {
        let v = variation(0.1, 8, 5);
        let r = run_chain_sweep(&nominal(3), &v, true).unwrap();
        for s in &r.samples {
            let one = chain_sample(
                &nominal(3),
                &v,
                &SweepOptions::default(),
                &states::closed_form_chain(3).unwrap(),
                s.index,
            );
            assert_eq!(one.e_j, s.e_j);
            assert!((one.fidelity.unwrap() - s.fidelity.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_path_agrees_with_dense() {
        let v = variation(0.1, 6, 2);
        let dense = run_chain_sweep_with(
            &nominal(5),
            &v,
            false,
            &SweepOptions {
                path: EvolutionPath::Dense,
                ..Default::default()
            },
        )
        .unwrap();
        let diag = run_chain_sweep_with(
            &nominal(5),
            &v,
            false,
            &SweepOptions {
                path: EvolutionPath::Diagonal,
                ..Default::default()
            },
        )
        .unwrap();
        for (a, b) in dense.samples.iter().zip(&diag.samples) {
            assert!((a.fidelity.unwrap() - b.fidelity.unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn common_sweep_reports_spread() {
        let q = ChargeQubitParams::at_degeneracy(100.0, 10.0).unwrap();
        let c = CouplerParams::common_inductance(10.0, 0.5);
        let flat = run_common_sweep(4, q, c, &variation(0.0, 3, 0), &SweepOptions::default()).unwrap();
        assert!(flat.fidelity.unwrap().min > 1.0 - 1e-9);
        let v = VariationSpec {
            e_j: 0.05,
            inductance: 0.05,
            samples: 20,
            seed: 3,
            ..Default::default()
        };
        let varied = run_common_sweep(4, q, c, &v, &SweepOptions::default()).unwrap();
        assert!(varied.fidelity.unwrap().mean < flat.fidelity.unwrap().mean);
        assert_eq!(varied.calibration_failures, 20);
    }

    #[test]
    fn t2_spread_is_suppressed_near_degeneracy() {
        let white = NoiseSpectrum::White { s0: 1e-3 };
        let near: Vec<_> = (0..4)
            .map(|_| QubitNoiseProfile::new(0.05, 5.0, white).unwrap())
            .collect();
        let far: Vec<_> = (0..4)
            .map(|_| QubitNoiseProfile::new(5.0, 5.0, white).unwrap())
            .collect();
        let v = variation(0.1, 60, 11);
        let zero = run_t2_sweep(&near, &variation(0.0, 5, 1)).unwrap();
        assert!(zero.t2_ns.unwrap().cv < 1e-12);
        let a = run_t2_sweep(&near, &v).unwrap().t2_ns.unwrap();
        let b = run_t2_sweep(&far, &v).unwrap().t2_ns.unwrap();
        assert!(a.cv < 0.01, "{a:?}");
        assert!(b.cv > 5.0 * a.cv, "{b:?}");
    }
}
