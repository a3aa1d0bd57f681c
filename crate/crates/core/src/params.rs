//! Circuit parameters, inter-qubit coupling formulas and calibration.
//!
//! Two array topologies are supported. In the chain, neighbouring charge
//! qubits share a large Josephson junction that acts as an inductance
//! `L_J = Φ₀/2πI₀`; local fluxes `Φ_i` tune both the single-qubit tunnelling
//! energy and the bond couplings, and an optional bias current through each
//! large junction raises its inductance by `1/cos γ`. In the common-inductance
//! array every qubit hangs off one inductor `L` threaded by a single flux
//! `Φ_e`, giving a uniform all-to-all coupling.
//!
//! All energies are `E/h` in GHz and fluxes are in units of `Φ₀`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{self, Tolerance};
use crate::units::{self, ghz_to_joule, joule_to_ghz, FLUX_QUANTUM};

/// Minimum `E_c/E_J` accepted as the charging regime.
pub const DEFAULT_CHARGING_RATIO: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Nearest-neighbour chain coupled through large junctions.
    Chain,
    /// All qubits on one common inductance (long-range coupling).
    #[serde(alias = "longrange", alias = "long_range")]
    CommonInductance,
}

/// A single charge qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargeQubitParams {
    /// `E_c/h` in GHz.
    #[serde(rename = "e_c")]
    pub charging_energy: f64,
    /// `E_J/h` in GHz, for the pair of identical junctions on the island.
    #[serde(rename = "e_j")]
    pub josephson_energy: f64,
    /// Reduced gate charge `C·V/e`; 1 is the degeneracy point.
    #[serde(rename = "n_g", default = "degeneracy")]
    pub gate_charge: f64,
    /// Local flux `Φ_i/Φ₀` (chain topology only).
    #[serde(default)]
    pub local_flux: f64,
}

fn degeneracy() -> f64 {
    1.0
}

impl ChargeQubitParams {
    pub fn new(charging_energy: f64, josephson_energy: f64, gate_charge: f64) -> Result<Self> {
        let q = Self {
            charging_energy,
            josephson_energy,
            gate_charge,
            local_flux: 0.0,
        };
        q.validate(DEFAULT_CHARGING_RATIO)?;
        Ok(q)
    }

    /// Qubit at the degeneracy point.
    pub fn at_degeneracy(charging_energy: f64, josephson_energy: f64) -> Result<Self> {
        Self::new(charging_energy, josephson_energy, 1.0)
    }

    pub fn with_flux(mut self, flux: f64) -> Result<Self> {
        check_flux(flux)?;
        self.local_flux = flux;
        Ok(self)
    }

    pub fn with_josephson_energy(mut self, e_j: f64) -> Self {
        self.josephson_energy = e_j;
        self
    }

    pub fn validate(&self, min_charging_ratio: f64) -> Result<()> {
        if !(self.charging_energy > 0.0 && self.charging_energy.is_finite()) {
            return Err(Error::domain(format!(
                "E_c must be positive, got {}",
                self.charging_energy
            )));
        }
        if !(self.josephson_energy > 0.0 && self.josephson_energy.is_finite()) {
            return Err(Error::domain(format!(
                "E_J must be positive, got {}",
                self.josephson_energy
            )));
        }
        if self.charging_energy / self.josephson_energy < min_charging_ratio {
            return Err(Error::domain(format!(
                "not in the charging regime: E_c/E_J = {:.3} < {}",
                self.charging_energy / self.josephson_energy,
                min_charging_ratio
            )));
        }
        if !self.gate_charge.is_finite() {
            return Err(Error::domain("gate charge must be finite"));
        }
        check_flux(self.local_flux)
    }

    /// `ε = ½E_c(n_g − 1)`.
    pub fn epsilon(&self) -> f64 {
        epsilon(self)
    }

    /// `Ē_J` at the qubit's own local flux.
    pub fn effective_ej(&self) -> f64 {
        self.josephson_energy * (PI * self.local_flux).cos()
    }
}

/// Large-junction or common-inductance coupling element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplerParams {
    LargeJj {
        /// `E_J0/h` in GHz.
        e_j0: f64,
        /// `I_b/I₀`; the sign selects the current direction.
        #[serde(default)]
        bias_ratio: f64,
    },
    CommonInductance {
        inductance_nh: f64,
        /// `Φ_e/Φ₀`.
        #[serde(default = "half")]
        common_flux: f64,
    },
}

fn half() -> f64 {
    0.5
}

impl CouplerParams {
    pub fn large_jj(e_j0: f64) -> Self {
        CouplerParams::LargeJj { e_j0, bias_ratio: 0.0 }
    }

    pub fn large_jj_biased(e_j0: f64, bias_ratio: f64) -> Self {
        CouplerParams::LargeJj { e_j0, bias_ratio }
    }

    pub fn common_inductance(inductance_nh: f64, common_flux: f64) -> Self {
        CouplerParams::CommonInductance {
            inductance_nh,
            common_flux,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CouplerParams::LargeJj { e_j0, bias_ratio } => {
                if !(e_j0 > 0.0) || e_j0.is_nan() {
                    return Err(Error::domain(format!("E_J0 must be positive, got {e_j0}")));
                }
                if !(bias_ratio.abs() < 1.0) {
                    return Err(Error::domain(format!(
                        "bias ratio {bias_ratio} switches the junction (|I_b| must stay below I_0)"
                    )));
                }
                Ok(())
            }
            CouplerParams::CommonInductance {
                inductance_nh,
                common_flux,
            } => {
                if !(inductance_nh > 0.0 && inductance_nh.is_finite()) {
                    return Err(Error::domain(format!(
                        "inductance must be positive, got {inductance_nh}"
                    )));
                }
                check_flux(common_flux)
            }
        }
    }
}

fn check_flux(flux: f64) -> Result<()> {
    if (0.0..=0.5).contains(&flux) {
        Ok(())
    } else {
        Err(Error::domain(format!("flux {flux} Φ₀ outside [0, ½]")))
    }
}

/// Single-qubit σ_z energy `ε = ½E_c(n_g − 1)` in GHz.
pub fn epsilon(q: &ChargeQubitParams) -> f64 {
    0.5 * q.charging_energy * (q.gate_charge - 1.0)
}

/// Flux-tuned tunnelling energy `Ē_J = E_J cos(πΦ/Φ₀)`.
pub fn effective_ej(e_j: f64, flux: f64) -> Result<f64> {
    check_flux(flux)?;
    if flux == 0.5 {
        return Ok(0.0);
    }
    Ok(e_j * (PI * flux).cos())
}

/// Effective inductance of a large junction, `L_J = (1/E_J0)(Φ₀/2π)²`, in henries.
pub fn junction_inductance(e_j0_ghz: f64) -> f64 {
    let phi = FLUX_QUANTUM / (2.0 * PI);
    phi * phi / ghz_to_joule(e_j0_ghz)
}

/// `L·π²·E_i·E_j/Φ₀²` with energies in GHz, result in GHz.
fn inductive_scale(inductance: f64, e_i: f64, e_j: f64) -> f64 {
    let ei = ghz_to_joule(e_i);
    let ej = ghz_to_joule(e_j);
    joule_to_ghz(inductance * PI * PI * ei * ej / (FLUX_QUANTUM * FLUX_QUANTUM))
}

fn sin_pi(flux: f64) -> f64 {
    if flux == 0.5 {
        1.0
    } else {
        (PI * flux).sin()
    }
}

/// Nearest-neighbour coupling through an unbiased large junction.
pub fn coupling_nn(e_ji: f64, e_jj: f64, flux_i: f64, flux_j: f64, c: &CouplerParams) -> Result<f64> {
    check_flux(flux_i)?;
    check_flux(flux_j)?;
    match *c {
        CouplerParams::LargeJj { e_j0, bias_ratio } => {
            c.validate()?;
            if bias_ratio != 0.0 {
                return Err(Error::contract(
                    "coupling_nn needs an unbiased junction; use coupling_biased",
                ));
            }
            Ok(inductive_scale(junction_inductance(e_j0), e_ji, e_jj) * sin_pi(flux_i) * sin_pi(flux_j))
        }
        CouplerParams::CommonInductance { .. } => Err(Error::contract("coupling_nn needs a large_jj coupler")),
    }
}

/// Nearest-neighbour coupling with the junction biased at `r_b = I_b/I₀`.
///
/// `γ = asin r_b` raises the inductance to `L_J/cos γ` and shifts the two
/// phase factors by `±γ/2`.
pub fn coupling_biased(e_ji: f64, e_jj: f64, flux_i: f64, flux_j: f64, c: &CouplerParams) -> Result<f64> {
    check_flux(flux_i)?;
    check_flux(flux_j)?;
    match *c {
        CouplerParams::LargeJj { e_j0, bias_ratio } => {
            c.validate()?;
            Ok(biased_value(e_ji, e_jj, flux_i, flux_j, e_j0, bias_ratio.asin()))
        }
        CouplerParams::CommonInductance { .. } => Err(Error::contract("coupling_biased needs a large_jj coupler")),
    }
}

fn biased_value(e_ji: f64, e_jj: f64, flux_i: f64, flux_j: f64, e_j0: f64, gamma: f64) -> f64 {
    if gamma == 0.0 {
        return inductive_scale(junction_inductance(e_j0), e_ji, e_jj) * sin_pi(flux_i) * sin_pi(flux_j);
    }
    let l = junction_inductance(e_j0) / gamma.cos();
    inductive_scale(l, e_ji, e_jj) * (PI * flux_i + 0.5 * gamma).sin() * (PI * flux_j - 0.5 * gamma).sin()
}

/// Long-range coupling through a common inductance; identical for every pair.
pub fn coupling_lr(e_ji: f64, e_jj: f64, c: &CouplerParams) -> Result<f64> {
    match *c {
        CouplerParams::CommonInductance {
            inductance_nh,
            common_flux,
        } => {
            c.validate()?;
            let s = sin_pi(common_flux);
            Ok(inductive_scale(inductance_nh * 1e-9, e_ji, e_jj) * s * s)
        }
        CouplerParams::LargeJj { .. } => Err(Error::contract("coupling_lr needs a common_inductance coupler")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationMode {
    /// Only the local fluxes are tuned; bias currents stay at zero.
    FluxOnly,
    /// Fluxes and the bias current of every large junction are tuned.
    #[default]
    FluxAndBias,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationOptions {
    pub mode: CalibrationMode,
    /// Requested Ising strength `g` in rad/ns; chosen automatically when absent.
    pub g_target: Option<f64>,
    /// Largest relative condition violation accepted as success.
    pub tolerance: f64,
    /// Largest `|I_b/I₀|` the solver may use.
    pub max_bias_ratio: f64,
    /// Couplings `ħg/4` below this (GHz) are treated as infeasible.
    pub min_coupling_ghz: f64,
    pub max_iterations: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            mode: CalibrationMode::FluxAndBias,
            g_target: None,
            tolerance: 1e-9,
            max_bias_ratio: 0.999,
            min_coupling_ghz: 1e-6,
            max_iterations: 200,
        }
    }
}

impl CalibrationOptions {
    pub fn flux_only() -> Self {
        Self {
            mode: CalibrationMode::FluxOnly,
            ..Self::default()
        }
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g_target = Some(g);
        self
    }
}

/// Solved control settings for an array.
///
/// Chain residual order: one entry per qubit (the `Ē_J` condition), then one
/// per bond (the `Λ` condition). Common-inductance arrays report one entry per
/// qubit (`Ē_J/(N−1) = Λ`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub topology: Topology,
    /// `Φ_i/Φ₀` per qubit (chain) or the single `Φ_e/Φ₀` (common inductance).
    pub fluxes: Vec<f64>,
    /// `I_b/I₀` per large junction; empty for the common inductance.
    pub bias_ratios: Vec<f64>,
    /// `g` in rad/ns.
    pub achieved_g: f64,
    /// `π/g` in ns.
    pub t_s: f64,
    /// `ħg/4` as `E/h` in GHz; equals the calibrated bond coupling.
    pub coupling_ghz: f64,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// Common inductance only: coupling at `Φ_e = ½Φ₀`, the largest reachable.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_coupling_ghz: Option<f64>,
}

impl CalibrationResult {
    fn new(
        topology: Topology,
        fluxes: Vec<f64>,
        bias_ratios: Vec<f64>,
        g: f64,
        residuals: Vec<f64>,
        max_coupling_ghz: Option<f64>,
    ) -> Self {
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        Self {
            topology,
            fluxes,
            bias_ratios,
            achieved_g: g,
            t_s: units::generation_time(g),
            coupling_ghz: units::quarter_hbar_g_ghz(g),
            residuals,
            max_residual,
            max_coupling_ghz,
        }
    }
}

fn end_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i + 1 == n {
        1.0
    } else {
        2.0
    }
}

fn junction_energy(c: &CouplerParams) -> Result<f64> {
    match *c {
        CouplerParams::LargeJj { e_j0, .. } => Ok(e_j0),
        CouplerParams::CommonInductance { .. } => Err(Error::contract("chain calibration needs large_jj couplers")),
    }
}

/// Recomputes every chain condition from explicit settings.
///
/// Conditions: `Ē_J1 = Ē_JN = ħg/4`, `½Ē_Ji = ħg/4` for interior qubits and
/// `Λ_{i,i+1} = ħg/4` for every bond. Values are relative violations.
pub fn chain_residuals(
    qubits: &[ChargeQubitParams],
    couplers: &[CouplerParams],
    fluxes: &[f64],
    bias_ratios: &[f64],
    g: f64,
) -> Result<Vec<f64>> {
    let n = qubits.len();
    if fluxes.len() != n || couplers.len() + 1 != n || bias_ratios.len() + 1 != n {
        return Err(Error::domain("settings do not match the array size"));
    }
    let target = units::quarter_hbar_g_ghz(g);
    let mut out = Vec::with_capacity(2 * n - 1);
    for (i, q) in qubits.iter().enumerate() {
        let ej = effective_ej(q.josephson_energy, fluxes[i])?;
        out.push((ej / end_weight(i, n) - target).abs() / target);
    }
    for (b, c) in couplers.iter().enumerate() {
        let e_j0 = junction_energy(c)?;
        let biased = CouplerParams::large_jj_biased(e_j0, bias_ratios[b]);
        let lam = coupling_biased(
            qubits[b].josephson_energy,
            qubits[b + 1].josephson_energy,
            fluxes[b],
            fluxes[b + 1],
            &biased,
        )?;
        out.push((lam - target).abs() / target);
    }
    Ok(out)
}

/// Calibrates a nearest-neighbour chain.
///
/// Once `ħg/4` is fixed, every `Φ_i` follows in closed form from its
/// `Ē_J` condition. Without a target, `g` is the smallest value at which no
/// bond exceeds its target coupling with zero bias: each bond's unbiased
/// equation `Λ_b(g) = ħg/4` is solved by bracketing and the largest root is
/// taken. The remaining bonds are then raised to the target by their bias
/// currents (one scalar solve each).
///
/// On failure the error carries the best settings found.
pub fn calibrate_chain(
    qubits: &[ChargeQubitParams],
    couplers: &[CouplerParams],
    opts: &CalibrationOptions,
) -> Result<CalibrationResult> {
    let n = qubits.len();
    if n < 2 {
        return Err(Error::domain(
            "a chain needs at least two qubits; a single qubit has no cluster state",
        ));
    }
    if couplers.len() + 1 != n {
        return Err(Error::domain(format!(
            "{} qubits need {} couplers, got {}",
            n,
            n - 1,
            couplers.len()
        )));
    }
    for q in qubits {
        q.validate(0.0)?;
    }
    let e_j0: Vec<f64> = couplers
        .iter()
        .map(|c| {
            c.validate()?;
            junction_energy(c)
        })
        .collect::<Result<_>>()?;
    let e_j: Vec<f64> = qubits.iter().map(|q| q.josephson_energy).collect();

    let q_cap = (0..n).map(|i| e_j[i] / end_weight(i, n)).fold(f64::INFINITY, f64::min);
    let flux_at = |i: usize, q: f64| -> f64 {
        let c = (end_weight(i, n) * q / e_j[i]).clamp(-1.0, 1.0);
        c.acos() / PI
    };
    let tol = Tolerance::new(1e-15, 0.0);

    let q = match opts.g_target {
        Some(g) => {
            let q = units::quarter_hbar_g_ghz(g);
            if !(g > 0.0) || q > q_cap {
                return Err(infeasible(
                    format!("requested ħg/4 = {q:.6} GHz exceeds the reachable Ē_J limit {q_cap:.6} GHz"),
                    f64::INFINITY,
                    None,
                ));
            }
            q
        }
        None => {
            let floor = opts.min_coupling_ghz;
            let mut best = floor;
            for b in 0..n - 1 {
                let bond = |q: f64| {
                    let lam = biased_value(e_j[b], e_j[b + 1], flux_at(b, q), flux_at(b + 1, q), e_j0[b], 0.0);
                    lam - q
                };
                let at_floor = bond(floor);
                if !(at_floor > 0.0) {
                    return Err(infeasible(
                        format!("bond {}-{} cannot reach the coupling floor {floor:e} GHz", b + 1, b + 2),
                        at_floor.abs() / floor,
                        None,
                    ));
                }
                let root = if bond(q_cap) >= 0.0 {
                    q_cap
                } else {
                    roots::find_root(bond, floor, q_cap, tol, opts.max_iterations)
                        .map_err(|e| Error::Numerical(format!("bond {}-{}: {e}", b + 1, b + 2)))?
                };
                best = best.max(root);
            }
            best
        }
    };
    if q < opts.min_coupling_ghz {
        return Err(infeasible(
            format!("coupling {q:e} GHz below the floor {:e} GHz", opts.min_coupling_ghz),
            f64::INFINITY,
            None,
        ));
    }
    let g = units::g_from_coupling_ghz(q);
    let fluxes: Vec<f64> = (0..n).map(|i| flux_at(i, q)).collect();

    let bias_ratios: Vec<f64> = match opts.mode {
        CalibrationMode::FluxOnly => vec![0.0; n - 1],
        CalibrationMode::FluxAndBias => (0..n - 1)
            .map(|b| solve_bias(e_j[b], e_j[b + 1], fluxes[b], fluxes[b + 1], e_j0[b], q, opts))
            .collect(),
    };

    let residuals = chain_residuals(qubits, couplers, &fluxes, &bias_ratios, g)?;
    let result = CalibrationResult::new(Topology::Chain, fluxes, bias_ratios, g, residuals, None);
    if result.max_residual > opts.tolerance {
        let worst = result.max_residual;
        return Err(infeasible(
            format!("conditions violated after calibration ({:?} mode)", opts.mode),
            worst,
            Some(result),
        ));
    }
    Ok(result)
}

fn infeasible(reason: String, max_residual: f64, best: Option<CalibrationResult>) -> Error {
    Error::Calibration {
        reason,
        max_residual,
        best: best.map(Box::new),
    }
}

/// Bias ratio bringing one bond to `target`, or the closest reachable value.
///
/// `Λ(γ) ∝ [cos(d + γ) − cos(a + b)]/(2 cos γ)` with `a, b = πΦ_i, πΦ_j` and
/// `d = a − b`; its derivative has the sign of `−sin d − cos(a+b)·sin γ`, so
/// each direction away from γ = 0 is monotone up to the stationary point.
fn solve_bias(e_i: f64, e_j: f64, flux_i: f64, flux_j: f64, e_j0: f64, target: f64, opts: &CalibrationOptions) -> f64 {
    let f = |gamma: f64| biased_value(e_i, e_j, flux_i, flux_j, e_j0, gamma) - target;
    let f0 = f(0.0);
    if f0.abs() <= 1e-15 * target {
        return 0.0;
    }
    let a = PI * flux_i;
    let b = PI * flux_j;
    let (sd, cs) = ((a - b).sin(), (a + b).cos());
    let limit = opts.max_bias_ratio.clamp(0.0, 1.0 - 1e-15).asin();

    let mut best = (f0.abs(), 0.0);
    let mut found: Option<f64> = None;
    for dir in [1.0, -1.0] {
        let mut end = limit;
        if cs != 0.0 {
            let v = -sd / cs;
            if v.abs() < 1.0 {
                let stationary = v.asin();
                if stationary * dir > 0.0 && stationary.abs() < end {
                    end = stationary.abs();
                }
            }
        }
        let end = dir * end;
        let f_end = f(end);
        if f_end.abs() < best.0 {
            best = (f_end.abs(), end);
        }
        if f_end.signum() != f0.signum() {
            let tol = Tolerance::new(1e-15, 1e-300);
            if let Ok(root) = roots::find_root(f, 0.0, end, tol, opts.max_iterations) {
                if found.map_or(true, |r| root.abs() < r.abs()) {
                    found = Some(root);
                }
            }
        }
    }
    found.unwrap_or(best.1).sin()
}

/// Solves `cos x/(N−1) = κ sin²x` on `(0, π/2)` for `x = πΦ_e/Φ₀`.
pub fn solve_common_flux(kappa: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain("a common-inductance array needs at least two qubits"));
    }
    assert!(kappa > 0.0, "κ must be positive, got {kappa}");
    let m = (n - 1) as f64;
    let f = |x: f64| x.cos() / m - kappa * x.sin().powi(2);
    roots::find_root(f, 0.0, 0.5 * PI, Tolerance::new(1e-15, 0.0), 400)
        .map_err(|e| Error::Numerical(format!("common flux: {e}")))
}

/// Calibrates `N` identical qubits on a common inductance: picks `Φ_e` such
/// that `Ē_J/(N−1) = Λ = ħg/4`.
pub fn calibrate_common(qubits: &[ChargeQubitParams], coupler: &CouplerParams) -> Result<CalibrationResult> {
    let n = qubits.len();
    if n < 2 {
        return Err(Error::domain(
            "a common-inductance array needs at least two qubits; a single qubit has no cluster state",
        ));
    }
    let first = qubits[0];
    first.validate(0.0)?;
    if qubits.iter().any(|q| q.josephson_energy != first.josephson_energy) {
        return Err(Error::domain("common-inductance calibration requires identical qubits"));
    }
    let inductance_nh = match *coupler {
        CouplerParams::CommonInductance { inductance_nh, .. } => inductance_nh,
        CouplerParams::LargeJj { .. } => {
            return Err(Error::contract("calibrate_common needs a common_inductance coupler"))
        }
    };
    coupler.validate()?;
    let e_j = first.josephson_energy;
    let at_max = CouplerParams::common_inductance(inductance_nh, 0.5);
    let lam_max = coupling_lr(e_j, e_j, &at_max)?;
    let kappa = lam_max / e_j;

    let x = solve_common_flux(kappa, n)?;
    let flux = x / PI;
    let lam = coupling_lr(e_j, e_j, &CouplerParams::common_inductance(inductance_nh, flux))?;
    let g = units::g_from_coupling_ghz(lam);
    let residuals = common_residuals(qubits, inductance_nh, flux, g)?;
    Ok(CalibrationResult::new(
        Topology::CommonInductance,
        vec![flux],
        Vec::new(),
        g,
        residuals,
        Some(lam_max),
    ))
}

/// Relative violation of `Ē_Ji/(N−1) = ħg/4` and `Λ_ij = ħg/4` per qubit.
pub fn common_residuals(qubits: &[ChargeQubitParams], inductance_nh: f64, flux: f64, g: f64) -> Result<Vec<f64>> {
    let n = qubits.len();
    let target = units::quarter_hbar_g_ghz(g);
    let c = CouplerParams::common_inductance(inductance_nh, flux);
    let mut out = Vec::with_capacity(n);
    for (i, q) in qubits.iter().enumerate() {
        let ej = effective_ej(q.josephson_energy, flux)?;
        let mut worst = (ej / (n - 1) as f64 - target).abs() / target;
        for p in qubits.iter().skip(i + 1) {
            let lam = coupling_lr(q.josephson_energy, p.josephson_energy, &c)?;
            worst = worst.max((lam - target).abs() / target);
        }
        out.push(worst);
    }
    Ok(out)
}
