//! Decoherence rates of single charge qubits and of the cluster state.
//!
//! Energies are `E/h` in GHz, times in ns, angular frequencies and rates in
//! rad/ns and 1/ns. Spectra are one-sided: the dephasing integral runs over
//! `ω ∈ (0, ∞)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::roots::{find_root, Tolerance};

/// Charge-noise power spectrum `S(ω)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpectrum {
    /// `S(ω) = s0`.
    White { s0: f64 },
    /// `S(ω) = α·ω·exp(−ω/ω_c)`.
    Ohmic { alpha: f64, cutoff: f64 },
    /// `S(ω) = A/ω` on `[ω_ir, ω_uv]`, zero outside.
    OneOverF {
        amplitude: f64,
        ir_cutoff: f64,
        uv_cutoff: f64,
    },
}

impl NoiseSpectrum {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        match *self {
            NoiseSpectrum::White { s0 } if ok(s0) => Ok(()),
            NoiseSpectrum::Ohmic { alpha, cutoff } if ok(alpha) && cutoff.is_finite() && cutoff > 0.0 => Ok(()),
            NoiseSpectrum::OneOverF {
                amplitude,
                ir_cutoff,
                uv_cutoff,
            } if ok(amplitude) && ir_cutoff > 0.0 && ir_cutoff < uv_cutoff && uv_cutoff.is_finite() => Ok(()),
            _ => Err(Error::domain(format!("invalid noise spectrum {self:?}"))),
        }
    }

    /// True when `S ≡ 0`.
    pub fn is_zero(&self) -> bool {
        match *self {
            NoiseSpectrum::White { s0 } => s0 == 0.0,
            NoiseSpectrum::Ohmic { alpha, .. } => alpha == 0.0,
            NoiseSpectrum::OneOverF { amplitude, .. } => amplitude == 0.0,
        }
    }

    /// `S(ω)` for `ω ≥ 0`.
    pub fn density(&self, omega: f64) -> f64 {
        match *self {
            NoiseSpectrum::White { s0 } => s0,
            NoiseSpectrum::Ohmic { alpha, cutoff } => {
                if omega.is_finite() {
                    alpha * omega * (-omega / cutoff).exp()
                } else {
                    0.0
                }
            }
            NoiseSpectrum::OneOverF {
                amplitude,
                ir_cutoff,
                uv_cutoff,
            } => {
                if (ir_cutoff..=uv_cutoff).contains(&omega) {
                    amplitude / omega
                } else {
                    0.0
                }
            }
        }
    }

    /// `(S', S'')` inside the support, used by the tail expansion.
    fn derivatives(&self, omega: f64) -> (f64, f64) {
        match *self {
            NoiseSpectrum::White { .. } => (0.0, 0.0),
            NoiseSpectrum::Ohmic { alpha, cutoff } => {
                let e = (-omega / cutoff).exp();
                (
                    alpha * e * (1.0 - omega / cutoff),
                    alpha * e * (omega / cutoff - 2.0) / cutoff,
                )
            }
            NoiseSpectrum::OneOverF { amplitude, .. } => {
                (-amplitude / (omega * omega), 2.0 * amplitude / (omega * omega * omega))
            }
        }
    }

    /// Frequencies where `S` has a kink or changes scale.
    fn features(&self) -> Vec<f64> {
        match *self {
            NoiseSpectrum::White { .. } => vec![],
            NoiseSpectrum::Ohmic { cutoff, .. } => vec![cutoff, 10.0 * cutoff, 40.0 * cutoff],
            NoiseSpectrum::OneOverF {
                ir_cutoff, uv_cutoff, ..
            } => vec![ir_cutoff, uv_cutoff],
        }
    }

    /// Lower and upper end of the support.
    fn support(&self) -> (f64, f64) {
        match *self {
            NoiseSpectrum::OneOverF {
                ir_cutoff, uv_cutoff, ..
            } => (ir_cutoff, uv_cutoff),
            _ => (0.0, f64::INFINITY),
        }
    }
}

/// A possibly infinite time. Serialised as `{"value_ns": x | null, "infinite": bool}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "DecayTimeRepr", try_from = "DecayTimeRepr")]
pub enum DecayTime {
    Finite(f64),
    Infinite,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecayTimeRepr {
    value_ns: Option<f64>,
    infinite: bool,
}

impl From<DecayTime> for DecayTimeRepr {
    fn from(t: DecayTime) -> Self {
        match t {
            DecayTime::Finite(v) => DecayTimeRepr {
                value_ns: Some(v),
                infinite: false,
            },
            DecayTime::Infinite => DecayTimeRepr {
                value_ns: None,
                infinite: true,
            },
        }
    }
}

impl TryFrom<DecayTimeRepr> for DecayTime {
    type Error = String;

    fn try_from(r: DecayTimeRepr) -> std::result::Result<Self, String> {
        match (r.value_ns, r.infinite) {
            (Some(v), false) => Ok(DecayTime::Finite(v)),
            (None, true) => Ok(DecayTime::Infinite),
            _ => Err("value_ns must be null exactly when infinite is true".into()),
        }
    }
}

impl DecayTime {
    /// Corresponding rate; `0` for the infinite sentinel.
    pub fn rate(self) -> f64 {
        match self {
            DecayTime::Finite(t) => 1.0 / t,
            DecayTime::Infinite => 0.0,
        }
    }

    pub fn from_rate(rate: f64) -> Self {
        if rate > 0.0 {
            DecayTime::Finite(1.0 / rate)
        } else {
            DecayTime::Infinite
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            DecayTime::Finite(t) => Some(t),
            DecayTime::Infinite => None,
        }
    }
}

/// One qubit's noise model: bias `ε`, effective Josephson energy `Ē`, spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitNoiseProfile {
    pub epsilon: f64,
    pub e_bar: f64,
    pub spectrum: NoiseSpectrum,
}

impl QubitNoiseProfile {
    pub fn new(epsilon: f64, e_bar: f64, spectrum: NoiseSpectrum) -> Result<Self> {
        if !(epsilon.is_finite() && e_bar.is_finite()) {
            return Err(Error::domain("ε and Ē must be finite"));
        }
        spectrum.validate()?;
        Ok(Self {
            epsilon,
            e_bar,
            spectrum,
        })
    }

    fn energy_sqr(&self) -> Result<f64> {
        let e2 = self.epsilon * self.epsilon + self.e_bar * self.e_bar;
        if e2 > 0.0 {
            Ok(e2)
        } else {
            Err(Error::domain("ε and Ē are both zero; the qubit has no level splitting"))
        }
    }

    /// Level splitting `Ω = 2√(ε² + Ē²)/ħ` in rad/ns.
    pub fn omega(&self) -> Result<f64> {
        Ok(2.0 * 2.0 * PI * self.energy_sqr()?.sqrt())
    }

    /// `A = Ē²/(ε² + Ē²)`.
    pub fn a(&self) -> Result<f64> {
        Ok(self.e_bar * self.e_bar / self.energy_sqr()?)
    }

    /// `B = ε²/(ε² + Ē²)`.
    pub fn b(&self) -> Result<f64> {
        Ok(self.epsilon * self.epsilon / self.energy_sqr()?)
    }
}

/// `Γ₁ = ½·A·S(Ω)` in 1/ns.
pub fn relaxation_rate(p: &QubitNoiseProfile) -> Result<f64> {
    Ok(0.5 * p.a()? * p.spectrum.density(p.omega()?))
}

#[inline]
fn sinc_sqr(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        let u2 = u * u;
        1.0 - u2 / 3.0 + 2.0 * u2 * u2 / 45.0
    } else {
        let s = u.sin() / u;
        s * s
    }
}

/// Boundary of the lobe region; beyond it the oscillatory part of the
/// integrand is handled by integration by parts.
const LOBE_LIMIT: f64 = 64.0 * PI;

/// `∫ S(2u/τ)·sinc²(u) du` over the support, in the variable `u = ωτ/2`.
fn sinc_integral(s: &NoiseSpectrum, tau: f64, rel_tol: f64) -> Result<f64> {
    let scale = 2.0 / tau;
    let (w_lo, w_hi) = s.support();
    let u_lo = w_lo / scale;
    let u_hi = w_hi / scale;
    let opts = QuadOptions {
        rel_tol,
        abs_tol: 0.0,
        max_intervals: 500,
    };
    let quad_err = |e| Error::Numerical(format!("dephasing quadrature at τ = {tau} ns: {e}"));

    let mut points: Vec<f64> = Vec::new();
    let lobe_end = u_hi.min(LOBE_LIMIT);
    if u_lo < lobe_end {
        points.push(u_lo);
        let mut k = (u_lo / PI).floor() + 1.0;
        while k * PI < lobe_end {
            points.push(k * PI);
            k += 1.0;
        }
        points.extend(
            s.features()
                .into_iter()
                .map(|w| w / scale)
                .filter(|&u| u > u_lo && u < lobe_end),
        );
        points.push(lobe_end);
        points.sort_by(f64::total_cmp);
        points.dedup();
    }
    let mut total = 0.0;
    for w in points.windows(2) {
        let r = integrate(|u| s.density(u * scale) * sinc_sqr(u), w[0], w[1], opts).map_err(quad_err)?;
        total += r.value;
    }

    let a = u_lo.max(LOBE_LIMIT);
    if u_hi > a {
        // sin²u/u² = (1 − cos 2u)/(2u²): smooth part by quadrature, the
        // oscillatory part by two integrations by parts.
        let smooth = if u_hi.is_finite() {
            integrate(|u| s.density(u * scale) / (u * u), a, u_hi, opts)
                .map_err(quad_err)?
                .value
        } else {
            // u = a/v maps (a, ∞) onto (0, 1]
            integrate(|v| s.density(a / v * scale) / a, 0.0, 1.0, opts)
                .map_err(quad_err)?
                .value
        };
        let boundary = |u: f64| -> f64 {
            let w = u * scale;
            let sv = s.density(w);
            let (d1, d2) = s.derivatives(w);
            let h = sv / (u * u);
            let h1 = d1 * scale / (u * u) - 2.0 * sv / (u * u * u);
            let h2 = d2 * scale * scale / (u * u) - 4.0 * d1 * scale / (u * u * u) + 6.0 * sv / (u * u * u * u);
            let (sin2, cos2) = (2.0 * u).sin_cos();
            h * sin2 / 2.0 + h1 * cos2 / 4.0 - h2 * sin2 / 8.0
        };
        let upper = if u_hi.is_finite() { boundary(u_hi) } else { 0.0 };
        let oscillatory = upper - boundary(a);
        total += 0.5 * smooth - 0.5 * oscillatory;
    }
    if !total.is_finite() {
        return Err(Error::Numerical(format!(
            "dephasing integral is not finite at τ = {tau} ns"
        )));
    }
    Ok(total.max(0.0))
}

/// Dephasing factor `η(τ) = B ∫dω S(ω) sin²(ωτ/2)/(2π(ω/2)²)`.
pub fn dephasing_factor(p: &QubitNoiseProfile, tau: f64) -> Result<f64> {
    dephasing_factor_tol(p, tau, 1e-10)
}

fn dephasing_factor_tol(p: &QubitNoiseProfile, tau: f64, rel_tol: f64) -> Result<f64> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::domain(format!("τ must be finite and non-negative, got {tau}")));
    }
    let b = p.b()?;
    if tau == 0.0 || b == 0.0 || p.spectrum.is_zero() {
        return Ok(0.0);
    }
    Ok(b * tau / PI * sinc_integral(&p.spectrum, tau, rel_tol)?)
}

/// Controls for the `η(T_φ) = 1` solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingOptions {
    pub tau_max: f64,
    pub rel_tol: f64,
}

impl Default for DephasingOptions {
    fn default() -> Self {
        Self {
            tau_max: 1e15,
            rel_tol: 1e-11,
        }
    }
}

/// `T_φ` with `η(T_φ) = 1`; [`DecayTime::Infinite`] when `B = 0` or `S ≡ 0`.
pub fn dephasing_time(p: &QubitNoiseProfile) -> Result<DecayTime> {
    dephasing_time_with(p, &DephasingOptions::default())
}

pub fn dephasing_time_with(p: &QubitNoiseProfile, opts: &DephasingOptions) -> Result<DecayTime> {
    if p.b()? == 0.0 || p.spectrum.is_zero() {
        return Ok(DecayTime::Infinite);
    }
    let mut err = None;
    let mut f = |tau: f64| match dephasing_factor(p, tau) {
        Ok(eta) => eta - 1.0,
        Err(e) => {
            err.get_or_insert(e);
            f64::NAN
        }
    };
    // geometric search for a sign change around τ = 1 ns
    let (mut lo, mut hi) = (1.0, 1.0);
    if f(hi) < 0.0 {
        loop {
            lo = hi;
            hi *= 4.0;
            if hi > opts.tau_max {
                return Err(Error::Numerical(format!(
                    "η stays below 1 up to τ = {} ns",
                    opts.tau_max
                )));
            }
            let v = f(hi);
            if v.is_nan() {
                break;
            }
            if v >= 0.0 {
                break;
            }
        }
    } else {
        loop {
            hi = lo;
            lo /= 4.0;
            if lo < 1e-30 {
                return Err(Error::Numerical("η exceeds 1 at every probed τ".into()));
            }
            let v = f(lo);
            if v.is_nan() || v < 0.0 {
                break;
            }
        }
    }
    let root = find_root(&mut f, lo, hi, Tolerance::new(opts.rel_tol, 0.0), 300);
    if let Some(e) = err {
        return Err(e);
    }
    root.map(DecayTime::Finite)
        .map_err(|e| Error::Numerical(format!("dephasing time root: {e}")))
}

/// Per-qubit breakdown of the Bloch–Redfield combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitRates {
    pub a: f64,
    pub b: f64,
    pub omega: f64,
    pub gamma1: f64,
    pub t_phi: DecayTime,
    pub gamma_phi: f64,
    pub gamma2: f64,
}

pub fn qubit_rates(p: &QubitNoiseProfile) -> Result<QubitRates> {
    let gamma1 = relaxation_rate(p)?;
    let t_phi = dephasing_time(p)?;
    let gamma_phi = t_phi.rate();
    Ok(QubitRates {
        a: p.a()?,
        b: p.b()?,
        omega: p.omega()?,
        gamma1,
        t_phi,
        gamma_phi,
        gamma2: 0.5 * gamma1 + gamma_phi,
    })
}

/// `Γ₂ = ½Γ₁ + Γ_φ` in 1/ns.
pub fn decoherence_rate(p: &QubitNoiseProfile) -> Result<f64> {
    Ok(qubit_rates(p)?.gamma2)
}

/// Cluster-state `T₂` from per-qubit `Γ₂`: `1/T₂ = Σ Γ₂⁽ⁱ⁾`.
pub fn cluster_t2(rates: &[f64]) -> Result<DecayTime> {
    if rates.is_empty() {
        return Err(Error::domain("cluster T₂ needs at least one qubit"));
    }
    if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(Error::domain(format!(
            "decoherence rates must be finite and non-negative, got {r}"
        )));
    }
    Ok(DecayTime::from_rate(rates.iter().sum()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPoint {
    pub e_bar: f64,
    pub a: f64,
    pub b: f64,
    pub gamma1: f64,
    pub gamma_phi: f64,
    pub gamma2: f64,
}

/// Response of `Γ₂` to `Ē → Ē(1 ± δ)` at fixed `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub delta: f64,
    pub epsilon_ratio: f64,
    pub nominal: SensitivityPoint,
    pub plus: SensitivityPoint,
    pub minus: SensitivityPoint,
    /// `max |Γ₂(±) − Γ₂|/Γ₂`.
    pub gamma2_relative_change: f64,
    /// `max |Γ_φ(±) − Γ_φ|/Γ₂`.
    pub gamma_phi_change_over_gamma2: f64,
    /// `max |A(±) − A|`.
    pub a_change: f64,
    /// Reference scale `δ·(ε/Ē)²`.
    pub predicted_scale: f64,
}

fn sensitivity_point(p: &QubitNoiseProfile) -> Result<SensitivityPoint> {
    let r = qubit_rates(p)?;
    Ok(SensitivityPoint {
        e_bar: p.e_bar,
        a: r.a,
        b: r.b,
        gamma1: r.gamma1,
        gamma_phi: r.gamma_phi,
        gamma2: r.gamma2,
    })
}

pub fn sensitivity_report(nominal: &QubitNoiseProfile, delta: f64) -> Result<SensitivityReport> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::domain(format!(
            "relative variation must lie in [0, 1), got {delta}"
        )));
    }
    let at = |f: f64| {
        sensitivity_point(&QubitNoiseProfile {
            e_bar: nominal.e_bar * f,
            ..*nominal
        })
    };
    let (nom, plus, minus) = (at(1.0)?, at(1.0 + delta)?, at(1.0 - delta)?);
    let rel = |x: f64| if nom.gamma2 > 0.0 { x / nom.gamma2 } else { 0.0 };
    let max2 = |f: &dyn Fn(&SensitivityPoint) -> f64| (f(&plus) - f(&nom)).abs().max((f(&minus) - f(&nom)).abs());
    let ratio = nominal.epsilon / nominal.e_bar;
    Ok(SensitivityReport {
        delta,
        epsilon_ratio: ratio,
        nominal: nom,
        plus,
        minus,
        gamma2_relative_change: rel(max2(&|p| p.gamma2)),
        gamma_phi_change_over_gamma2: rel(max2(&|p| p.gamma_phi)),
        a_change: max2(&|p| p.a),
        predicted_scale: delta * ratio * ratio,
    })
}
