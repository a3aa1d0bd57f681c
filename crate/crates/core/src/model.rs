//! Hamiltonians of the charge-qubit arrays.
//!
//! [`IsingXModel`] is the projector form
//! `H = s·ħg Σ_{i,j} Γ(i−j) (1 ± σ_x⁽ⁱ⁾)/2 (1 ± σ_x⁽ʲ⁾)/2`, which is diagonal in
//! the σ_x product basis. Physical Hamiltonians (with σ_z terms away from the
//! degeneracy point) are plain [`PauliTerm`] lists.
//!
//! Qubits are numbered from 1. In an x-basis bitstring, qubit 1 is the most
//! significant bit and bit value 0 stands for `|−⟩` (σ_x eigenvalue +1), bit
//! value 1 for `|+⟩` (eigenvalue −1).

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{self, CalibrationResult, ChargeQubitParams, CouplerParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// `coefficient · ∏ σ_p⁽ⁱ⁾`, coefficient as `E/h` in GHz. No factors means identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub factors: BTreeMap<usize, Pauli>,
}

impl PauliTerm {
    pub fn new(coefficient: f64, factors: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        if !coefficient.is_finite() {
            return Err(Error::domain("Pauli coefficient must be finite"));
        }
        let factors: BTreeMap<usize, Pauli> = factors.into_iter().collect();
        if factors.contains_key(&0) {
            return Err(Error::domain("qubit indices start at 1"));
        }
        Ok(Self { coefficient, factors })
    }

    pub fn identity(coefficient: f64) -> Self {
        Self {
            coefficient,
            factors: BTreeMap::new(),
        }
    }

    pub fn single(coefficient: f64, qubit: usize, p: Pauli) -> Self {
        debug_assert!(qubit >= 1);
        Self {
            coefficient,
            factors: BTreeMap::from([(qubit, p)]),
        }
    }

    pub fn pair(coefficient: f64, i: usize, p: Pauli, j: usize, q: Pauli) -> Self {
        debug_assert!(i >= 1 && j >= 1 && i != j);
        Self {
            coefficient,
            factors: BTreeMap::from([(i, p), (j, q)]),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn is_x_only(&self) -> bool {
        self.factors.values().all(|p| *p == Pauli::X)
    }

    pub fn max_qubit(&self) -> usize {
        self.factors.keys().next_back().copied().unwrap_or(0)
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+.6}", self.coefficient)?;
        if self.factors.is_empty() {
            return write!(f, "·I");
        }
        for (q, p) in &self.factors {
            write!(f, "·{p:?}{q}")?;
        }
        Ok(())
    }
}

/// Merges terms with identical factors and drops non-identity terms whose
/// coefficient is exactly zero. The identity term is kept once present.
pub fn combine_terms(terms: impl IntoIterator<Item = PauliTerm>) -> Vec<PauliTerm> {
    let mut acc: BTreeMap<Vec<(usize, Pauli)>, f64> = BTreeMap::new();
    for t in terms {
        let key: Vec<(usize, Pauli)> = t.factors.into_iter().collect();
        *acc.entry(key).or_insert(0.0) += t.coefficient;
    }
    acc.into_iter()
        .filter(|(k, c)| k.is_empty() || *c != 0.0)
        .map(|(k, c)| PauliTerm {
            coefficient: c,
            factors: k.into_iter().collect(),
        })
        .collect()
}

/// True when every term contains only σ_x factors.
pub fn is_x_diagonal(terms: &[PauliTerm]) -> bool {
    terms.iter().all(PauliTerm::is_x_only)
}

/// Sum of the identity coefficients.
pub fn constant_term(terms: &[PauliTerm]) -> f64 {
    terms.iter().filter(|t| t.is_identity()).map(|t| t.coefficient).sum()
}

/// Number of qubits a term list touches (highest index).
pub fn qubit_span(terms: &[PauliTerm]) -> usize {
    terms.iter().map(PauliTerm::max_qubit).max().unwrap_or(0)
}

/// Serializes a term list as the JSON document used for snapshots.
pub fn terms_to_json(terms: &[PauliTerm]) -> String {
    serde_json::to_string_pretty(terms).expect("term list serializes")
}

pub fn terms_from_json(s: &str) -> Result<Vec<PauliTerm>> {
    let terms: Vec<PauliTerm> = serde_json::from_str(s).map_err(|e| Error::config("terms", e.to_string()))?;
    terms
        .into_iter()
        .map(|t| PauliTerm::new(t.coefficient, t.factors))
        .collect()
}

/// Which projector `(1 ± σ_x)/2` appears in the interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectorSign {
    Plus,
    Minus,
}

impl ProjectorSign {
    fn value(self) -> f64 {
        match self {
            ProjectorSign::Plus => 1.0,
            ProjectorSign::Minus => -1.0,
        }
    }
}

/// Interaction range `Γ(i − j)`, summed over ordered pairs `(i, j)`.
#[derive(Clone)]
pub enum Kernel {
    /// `Γ(i − j) = δ_{i+1,j}`.
    NearestNeighbor,
    /// `Γ(i − j) = 1` for `j > i`.
    AllPairs,
    Custom(Arc<dyn Fn(isize) -> f64 + Send + Sync>),
}

impl Kernel {
    pub fn custom<F: Fn(isize) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Kernel::Custom(Arc::new(f))
    }

    /// `Γ(d)` with `d = i − j`.
    pub fn weight(&self, d: isize) -> f64 {
        match self {
            Kernel::NearestNeighbor => f64::from(u8::from(d == -1)),
            Kernel::AllPairs => f64::from(u8::from(d < 0)),
            Kernel::Custom(f) => f(d),
        }
    }
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::NearestNeighbor => write!(f, "NearestNeighbor"),
            Kernel::AllPairs => write!(f, "AllPairs"),
            Kernel::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Ising-like Hamiltonian built only from σ_x, with an arbitrary kernel.
#[derive(Debug, Clone)]
pub struct IsingXModel {
    n_qubits: usize,
    g: f64,
    scale: f64,
    kernel: Kernel,
    sign: ProjectorSign,
    includes_constant: bool,
    // zero-based (i, j, Γ(i−j)) with nonzero weight
    pairs: Vec<(usize, usize, f64)>,
}

impl IsingXModel {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// `g` in rad/ns.
    pub fn g(&self) -> f64 {
        self.g
    }

    /// Overall sign/multiplier in front of `ħg`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn sign(&self) -> ProjectorSign {
        self.sign
    }

    pub fn includes_constant(&self) -> bool {
        self.includes_constant
    }

    /// Every term commutes with every other; always true for this type.
    pub fn is_x_diagonal(&self) -> bool {
        true
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// Drops (or restores) the identity part; only the global phase changes.
    pub fn with_constant(mut self, includes_constant: bool) -> Self {
        self.includes_constant = includes_constant;
        self
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.iter().filter(|(i, j, _)| i != j).count()
    }

    /// Identity part of the expansion in units of `ħg` (before `scale`).
    fn constant_weight(&self) -> f64 {
        self.pairs
            .iter()
            .map(|&(i, j, w)| if i == j { 0.5 * w } else { 0.25 * w })
            .sum()
    }

    fn active_mask(&self, index: usize) -> usize {
        let full = if self.n_qubits == usize::BITS as usize {
            usize::MAX
        } else {
            (1usize << self.n_qubits) - 1
        };
        match self.sign {
            ProjectorSign::Minus => index & full,
            ProjectorSign::Plus => !index & full,
        }
    }

    /// `Σ Γ(i−j) p_i p_j` for an x-basis bitstring, i.e. the eigenvalue in
    /// units of `s·ħg` including the identity part.
    pub fn projector_weight(&self, index: usize) -> f64 {
        let active = self.active_mask(index);
        match self.kernel {
            Kernel::NearestNeighbor => f64::from((active & (active >> 1)).count_ones()),
            Kernel::AllPairs => {
                let k = f64::from(active.count_ones());
                0.5 * k * (k - 1.0)
            }
            Kernel::Custom(_) => {
                let n = self.n_qubits;
                self.pairs
                    .iter()
                    .filter(|&&(i, j, _)| (active >> (n - 1 - i)) & 1 == 1 && (active >> (n - 1 - j)) & 1 == 1)
                    .map(|&(_, _, w)| w)
                    .sum()
            }
        }
    }

    /// `E/ħ` in rad/ns of x-basis bitstring `index`.
    pub fn angular_energy(&self, index: usize) -> f64 {
        let mut w = self.projector_weight(index);
        if !self.includes_constant {
            w -= self.constant_weight();
        }
        self.scale * self.g * w
    }

    /// Eigenvalue (`E/h`, GHz) on a product x-state given as σ_x eigenvalues
    /// `±1`, qubit 1 first.
    pub fn x_basis_energy(&self, config: &[i8]) -> Result<f64> {
        let index = config_to_index(config, self.n_qubits)?;
        Ok(self.angular_energy(index) / (2.0 * PI))
    }

    /// Expansion into Pauli terms (coefficients in GHz), identity included
    /// when the model carries its constant.
    pub fn to_pauli_terms(&self) -> Vec<PauliTerm> {
        let unit = self.scale * self.g / (2.0 * PI);
        let s = self.sign.value();
        let mut out = Vec::new();
        for &(i, j, w) in &self.pairs {
            let (qi, qj) = (i + 1, j + 1);
            if i == j {
                let c = 0.5 * unit * w;
                out.push(PauliTerm::identity(c));
                out.push(PauliTerm::single(s * c, qi, Pauli::X));
            } else {
                let c = 0.25 * unit * w;
                out.push(PauliTerm::identity(c));
                out.push(PauliTerm::single(s * c, qi, Pauli::X));
                out.push(PauliTerm::single(s * c, qj, Pauli::X));
                out.push(PauliTerm::pair(c, qi, Pauli::X, qj, Pauli::X));
            }
        }
        let mut terms = combine_terms(out);
        if !self.includes_constant {
            terms.retain(|t| !t.is_identity());
        }
        terms
    }
}

/// Converts σ_x eigenvalues (qubit 1 first) into an x-basis bitstring.
pub fn config_to_index(config: &[i8], n: usize) -> Result<usize> {
    if config.len() != n {
        return Err(Error::domain(format!(
            "configuration has {} entries, model has {n} qubits",
            config.len()
        )));
    }
    config.iter().try_fold(0usize, |acc, &x| match x {
        1 => Ok(acc << 1),
        -1 => Ok((acc << 1) | 1),
        other => Err(Error::domain(format!("σ_x eigenvalue must be ±1, got {other}"))),
    })
}

/// Inverse of [`config_to_index`].
pub fn index_to_config(index: usize, n: usize) -> Vec<i8> {
    (0..n)
        .map(|k| if (index >> (n - 1 - k)) & 1 == 1 { -1 } else { 1 })
        .collect()
}

/// General kernel form with overall `+ħg`.
pub fn build_general(n: usize, g: f64, kernel: Kernel, sign: ProjectorSign) -> Result<IsingXModel> {
    if n == 0 {
        return Err(Error::domain("a model needs at least one qubit"));
    }
    if n > usize::BITS as usize - 1 {
        return Err(Error::domain(format!("{n} qubits cannot be indexed")));
    }
    if !g.is_finite() {
        return Err(Error::domain("g must be finite"));
    }
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let w = kernel.weight(i as isize - j as isize);
            if !w.is_finite() {
                return Err(Error::domain(format!(
                    "kernel weight Γ({}) is not finite",
                    i as isize - j as isize
                )));
            }
            if w != 0.0 {
                pairs.push((i, j, w));
            }
        }
    }
    Ok(IsingXModel {
        n_qubits: n,
        g,
        scale: 1.0,
        kernel,
        sign,
        includes_constant: true,
        pairs,
    })
}

/// Nearest-neighbour chain `ħg Σ (1−σ_x⁽ⁱ⁾)/2 (1−σ_x⁽ⁱ⁺¹⁾)/2`.
pub fn build_chain(n: usize, g: f64) -> Result<IsingXModel> {
    if n < 2 {
        return Err(Error::domain("the chain model needs at least two qubits"));
    }
    build_general(n, g, Kernel::NearestNeighbor, ProjectorSign::Minus)
}

/// Long-range array `−ħg Σ_{j>i} (1+σ_x⁽ⁱ⁾)/2 (1+σ_x⁽ʲ⁾)/2`.
pub fn build_longrange(n: usize, g: f64) -> Result<IsingXModel> {
    if n < 2 {
        return Err(Error::domain("the long-range model needs at least two qubits"));
    }
    Ok(build_general(n, g, Kernel::AllPairs, ProjectorSign::Plus)?.with_scale(-1.0))
}

/// `Σ_i [ε_i σ_z⁽ⁱ⁾ − Ē_Ji σ_x⁽ⁱ⁾] + Σ_i Λ_{i,i+1} σ_x⁽ⁱ⁾σ_x⁽ⁱ⁺¹⁾` at the
/// calibrated fluxes and bias currents.
pub fn build_physical_chain(
    qubits: &[ChargeQubitParams],
    couplers: &[CouplerParams],
    cal: &CalibrationResult,
) -> Result<Vec<PauliTerm>> {
    let n = qubits.len();
    if cal.fluxes.len() != n || couplers.len() + 1 != n || cal.bias_ratios.len() + 1 != n {
        return Err(Error::domain("calibration does not match the array"));
    }
    let mut terms = Vec::with_capacity(3 * n);
    for (i, q) in qubits.iter().enumerate() {
        terms.push(PauliTerm::single(params::epsilon(q), i + 1, Pauli::Z));
        terms.push(PauliTerm::single(
            -params::effective_ej(q.josephson_energy, cal.fluxes[i])?,
            i + 1,
            Pauli::X,
        ));
    }
    for (b, c) in couplers.iter().enumerate() {
        let biased = match *c {
            CouplerParams::LargeJj { e_j0, .. } => CouplerParams::large_jj_biased(e_j0, cal.bias_ratios[b]),
            CouplerParams::CommonInductance { .. } => return Err(Error::contract("chain needs large_jj couplers")),
        };
        let lam = params::coupling_biased(
            qubits[b].josephson_energy,
            qubits[b + 1].josephson_energy,
            cal.fluxes[b],
            cal.fluxes[b + 1],
            &biased,
        )?;
        terms.push(PauliTerm::pair(lam, b + 1, Pauli::X, b + 2, Pauli::X));
    }
    Ok(combine_terms(terms))
}

/// `Σ_i [ε_i σ_z⁽ⁱ⁾ − Ē_Ji σ_x⁽ⁱ⁾] − Σ_{j>i} Λ_ij σ_x⁽ⁱ⁾σ_x⁽ʲ⁾` for qubits
/// on a common inductance threaded by `flux` (units of Φ₀).
pub fn build_physical_common(qubits: &[ChargeQubitParams], inductance_nh: f64, flux: f64) -> Result<Vec<PauliTerm>> {
    let c = CouplerParams::common_inductance(inductance_nh, flux);
    let n = qubits.len();
    let mut terms = Vec::with_capacity(n * (n + 3) / 2);
    for (i, q) in qubits.iter().enumerate() {
        terms.push(PauliTerm::single(params::epsilon(q), i + 1, Pauli::Z));
        terms.push(PauliTerm::single(
            -params::effective_ej(q.josephson_energy, flux)?,
            i + 1,
            Pauli::X,
        ));
        for (j, p) in qubits.iter().enumerate().skip(i + 1) {
            let lam = params::coupling_lr(q.josephson_energy, p.josephson_energy, &c)?;
            terms.push(PauliTerm::pair(-lam, i + 1, Pauli::X, j + 1, Pauli::X));
        }
    }
    Ok(combine_terms(terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::CalibrationOptions;
    use approx::assert_relative_eq;

    fn coeff(terms: &[PauliTerm], factors: &[(usize, Pauli)]) -> f64 {
        let key: BTreeMap<usize, Pauli> = factors.iter().copied().collect();
        terms.iter().find(|t| t.factors == key).map_or(0.0, |t| t.coefficient)
    }

    // Symbolic oracle: expand ∏ of the two projectors literally for each
    // ordered pair, independently of IsingXModel::to_pauli_terms.
    fn expand_by_hand(n: usize, unit: f64, s: f64, pairs: &[(usize, usize)]) -> Vec<PauliTerm> {
        let mut out = Vec::new();
        for &(i, j) in pairs {
            let half_i = [(1.0, None), (s, Some(i))];
            let half_j = [(1.0, None), (s, Some(j))];
            for (ci, fi) in half_i {
                for (cj, fj) in half_j {
                    let mut f = BTreeMap::new();
                    if let Some(q) = fi {
                        f.insert(q, Pauli::X);
                    }
                    if let Some(q) = fj {
                        f.insert(q, Pauli::X);
                    }
                    out.push(PauliTerm {
                        coefficient: unit * 0.25 * ci * cj,
                        factors: f,
                    });
                }
            }
        }
        assert!(pairs.iter().all(|&(i, j)| i <= n && j <= n));
        combine_terms(out)
    }

    #[test]
    fn two_qubit_general_expansion() {
        let g = 2.0 * PI;
        let m = build_general(2, g, Kernel::NearestNeighbor, ProjectorSign::Minus).unwrap();
        let t = m.to_pauli_terms();
        // ħg/h = 1 GHz here
        assert_relative_eq!(coeff(&t, &[]), 0.25);
        assert_relative_eq!(coeff(&t, &[(1, Pauli::X)]), -0.25);
        assert_relative_eq!(coeff(&t, &[(2, Pauli::X)]), -0.25);
        assert_relative_eq!(coeff(&t, &[(1, Pauli::X), (2, Pauli::X)]), 0.25);
        assert_eq!(t.len(), 4);
    }

    #[test]
    fn single_qubit_model_has_no_pairs() {
        let m = build_general(1, 1.0, Kernel::NearestNeighbor, ProjectorSign::Minus).unwrap();
        assert_eq!(m.pair_count(), 0);
        assert!(m.to_pauli_terms().iter().all(|t| t.coefficient == 0.0));
        let all = build_general(3, 1.0, Kernel::AllPairs, ProjectorSign::Plus).unwrap();
        assert_eq!(all.pair_count(), 3);
    }

    #[test]
    fn chain_expansion_matches_hand_oracle() {
        let g = 2.0 * PI * 0.8;
        for n in 2..=7 {
            let m = build_chain(n, g).unwrap();
            let pairs: Vec<_> = (1..n).map(|i| (i, i + 1)).collect();
            let oracle = expand_by_hand(n, 0.8, -1.0, &pairs);
            let got = m.to_pauli_terms();
            assert_eq!(got.len(), oracle.len());
            for (a, b) in got.iter().zip(&oracle) {
                assert_eq!(a.factors, b.factors);
                assert_relative_eq!(a.coefficient, b.coefficient, max_relative = 1e-14);
            }
            // interior −½ħg, ends −¼ħg, pairs +¼ħg, constant (N−1)/4 ħg
            assert_relative_eq!(coeff(&got, &[(1, Pauli::X)]), -0.25 * 0.8, max_relative = 1e-14);
            assert_relative_eq!(coeff(&got, &[(n, Pauli::X)]), -0.25 * 0.8, max_relative = 1e-14);
            if n > 2 {
                assert_relative_eq!(coeff(&got, &[(2, Pauli::X)]), -0.5 * 0.8, max_relative = 1e-14);
            }
            assert_relative_eq!(
                coeff(&got, &[(1, Pauli::X), (2, Pauli::X)]),
                0.25 * 0.8,
                max_relative = 1e-14
            );
            assert_relative_eq!(constant_term(&got), 0.25 * 0.8 * (n - 1) as f64, max_relative = 1e-14);
        }
    }

    #[test]
    fn longrange_expansion_matches_hand_oracle() {
        let g = 2.0 * PI;
        for n in 2..=6 {
            let m = build_longrange(n, g).unwrap();
            let pairs: Vec<_> = (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect();
            let oracle = expand_by_hand(n, -1.0, 1.0, &pairs);
            let got = m.to_pauli_terms();
            assert_eq!(got, oracle);
            assert_relative_eq!(
                coeff(&got, &[(1, Pauli::X)]),
                -0.25 * (n - 1) as f64,
                max_relative = 1e-14
            );
            assert_eq!(m.pair_count(), n * (n - 1) / 2);
        }
    }

    #[test]
    fn chain_rejects_small_n() {
        assert!(build_chain(1, 1.0).is_err());
        assert!(build_longrange(1, 1.0).is_err());
        assert!(build_general(0, 1.0, Kernel::AllPairs, ProjectorSign::Plus).is_err());
    }

    #[test]
    fn x_basis_energy_examples() {
        let g = 2.0 * PI; // ħg = 1 GHz·h
        let chain = build_chain(3, g).unwrap();
        assert_eq!(chain.x_basis_energy(&[1, 1, 1]).unwrap(), 0.0);
        assert_relative_eq!(chain.x_basis_energy(&[-1, -1, -1]).unwrap(), 2.0);
        let lr = build_longrange(4, g).unwrap();
        assert_relative_eq!(lr.x_basis_energy(&[1, 1, 1, 1]).unwrap(), -6.0);
        assert!(chain.x_basis_energy(&[1, 1]).is_err());
        assert!(chain.x_basis_energy(&[1, 0, 1]).is_err());
    }

    #[test]
    fn expansion_resums_to_x_basis_energy() {
        let g = 1.7;
        let custom = build_general(
            5,
            g,
            Kernel::custom(|d| if d.abs() <= 2 && d != 0 { 0.5 } else { 0.0 }),
            ProjectorSign::Minus,
        )
        .unwrap();
        for m in [build_chain(5, g).unwrap(), build_longrange(5, g).unwrap(), custom] {
            let terms = m.to_pauli_terms();
            for idx in 0..32 {
                let x = index_to_config(idx, 5);
                let direct: f64 = terms
                    .iter()
                    .map(|t| t.coefficient * t.factors.keys().map(|&q| f64::from(x[q - 1])).product::<f64>())
                    .sum();
                assert_relative_eq!(direct, m.x_basis_energy(&x).unwrap(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn config_index_round_trip() {
        for idx in 0..64 {
            assert_eq!(config_to_index(&index_to_config(idx, 6), 6).unwrap(), idx);
        }
    }

    #[test]
    fn dropping_constant_shifts_energy() {
        let m = build_chain(4, 2.0 * PI).unwrap();
        let shifted = m.clone().with_constant(false);
        let x = [1, -1, -1, 1];
        assert_relative_eq!(
            m.x_basis_energy(&x).unwrap() - shifted.x_basis_energy(&x).unwrap(),
            0.75
        );
        assert!(shifted.to_pauli_terms().iter().all(|t| !t.is_identity()));
    }

    #[test]
    fn physical_chain_at_degeneracy_is_chain_minus_constant() {
        let n = 5;
        let qs = vec![ChargeQubitParams::at_degeneracy(100.0, 10.0).unwrap(); n];
        let cs = vec![CouplerParams::large_jj(50.0); n - 1];
        let cal = params::calibrate_chain(&qs, &cs, &CalibrationOptions::default()).unwrap();
        let phys = build_physical_chain(&qs, &cs, &cal).unwrap();
        let ideal = build_chain(n, cal.achieved_g).unwrap().to_pauli_terms();
        assert_eq!(constant_term(&phys), 0.0);
        let ideal_c = constant_term(&ideal);
        assert_relative_eq!(ideal_c, cal.coupling_ghz * (n - 1) as f64, max_relative = 1e-12);
        let non_identity: Vec<_> = ideal.iter().filter(|t| !t.is_identity()).collect();
        assert_eq!(phys.len(), non_identity.len());
        for (a, b) in phys.iter().zip(non_identity) {
            assert_eq!(a.factors, b.factors);
            assert_relative_eq!(a.coefficient, b.coefficient, max_relative = 1e-9);
        }
    }

    #[test]
    fn physical_chain_off_degeneracy_has_sigma_z() {
        let qs = vec![ChargeQubitParams::new(100.0, 10.0, 0.0).unwrap(); 3];
        let cs = vec![CouplerParams::large_jj(50.0); 2];
        let cal = params::calibrate_chain(&qs, &cs, &CalibrationOptions::default()).unwrap();
        let phys = build_physical_chain(&qs, &cs, &cal).unwrap();
        for q in 1..=3 {
            assert_relative_eq!(coeff(&phys, &[(q, Pauli::Z)]), -50.0);
        }
        assert!(!is_x_diagonal(&phys));
    }

    #[test]
    fn zero_coupling_gives_independent_qubits() {
        let qs = vec![ChargeQubitParams::at_degeneracy(100.0, 10.0).unwrap(); 3];
        let cs = vec![CouplerParams::large_jj(50.0); 2];
        let mut cal = params::calibrate_chain(&qs, &cs, &CalibrationOptions::default()).unwrap();
        cal.fluxes = vec![0.0; 3];
        cal.bias_ratios = vec![0.0; 2];
        let phys = build_physical_chain(&qs, &cs, &cal).unwrap();
        assert!(phys.iter().all(|t| t.factors.len() == 1));
    }

    #[test]
    fn json_round_trip() {
        let t = build_chain(3, 2.0).unwrap().to_pauli_terms();
        let back = terms_from_json(&terms_to_json(&t)).unwrap();
        assert_eq!(t, back);
    }
}
