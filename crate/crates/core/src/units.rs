//! Physical constants and the unit conventions used across the crate.
//!
//! Energies are carried as frequency equivalents `E/h` in GHz, times in ns,
//! angular frequencies in rad/ns, fluxes in units of the flux quantum and
//! inductances in nH at the interfaces (henries internally).

use std::f64::consts::PI;

/// Magnetic flux quantum `h/2e` in webers.
pub const FLUX_QUANTUM: f64 = 2.067833848e-15;
/// Planck constant in J·s.
pub const PLANCK: f64 = 6.62607015e-34;

/// The fixed SI constants the coupling formulas are evaluated with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub flux_quantum: f64,
    pub planck_h: f64,
}

impl PhysicalConstants {
    pub const SI: PhysicalConstants = PhysicalConstants {
        flux_quantum: FLUX_QUANTUM,
        planck_h: PLANCK,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI
    }
}

/// `E/h` in GHz to joules.
pub fn ghz_to_joule(e_ghz: f64) -> f64 {
    e_ghz * 1e9 * PLANCK
}

/// Joules to `E/h` in GHz.
pub fn joule_to_ghz(e: f64) -> f64 {
    e / PLANCK / 1e9
}

/// `E/ħ` in rad/ns for an energy given as `E/h` in GHz.
pub fn angular_from_ghz(e_ghz: f64) -> f64 {
    2.0 * PI * e_ghz
}

/// Converts the Ising strength `g` (rad/ns) into `ħg/4` expressed in GHz.
pub fn quarter_hbar_g_ghz(g: f64) -> f64 {
    g / (8.0 * PI)
}

/// Inverse of [`quarter_hbar_g_ghz`]: the `g` for which `ħg/4 = Λ`.
pub fn g_from_coupling_ghz(coupling_ghz: f64) -> f64 {
    8.0 * PI * coupling_ghz
}

/// Shortest generation time `π/g` in ns.
pub fn generation_time(g: f64) -> f64 {
    PI / g
}
