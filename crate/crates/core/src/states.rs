//! Target cluster states, fidelity, Pauli expectations and bipartite entropy.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::engine::{self, walsh_hadamard, Basis, StateVector};
use crate::error::{Error, Result};
use crate::model::PauliTerm;

/// Probabilities below this are treated as exact zeros in the entropy.
pub const ENTROPY_CUTOFF: f64 = 1e-14;

/// Maps an x-configuration (σ_x eigenvalues, `+1` for `|−⟩`, `−1` for `|+⟩`,
/// qubit 1 first) to the unnormalised amplitude of that product state.
pub trait XConfigAmplitudeRule {
    fn amplitude(&self, config: &[i8]) -> Complex64;
}

/// `2^{−N/2} ⊗_i (|−⟩_i + |+⟩_i σ_x^{(i+1)})` with `σ_x^{(N+1)} ≡ 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ChainRule;

impl XConfigAmplitudeRule for ChainRule {
    fn amplitude(&self, config: &[i8]) -> Complex64 {
        let n = config.len();
        let sign: i32 = (0..n)
            .map(|i| match config[i] {
                1 => 1,
                _ => config.get(i + 1).map_or(1, |&x| i32::from(x)),
            })
            .product();
        Complex64::new(f64::from(sign), 0.0)
    }
}

/// `2^{−N/2} ⊗_i (|−⟩_i (−1)^{N−i} ∏_{j>i} σ_x^{(j)} + |+⟩_i)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LongRangeRule;

impl XConfigAmplitudeRule for LongRangeRule {
    fn amplitude(&self, config: &[i8]) -> Complex64 {
        let n = config.len();
        let mut sign = 1i32;
        for i in 0..n {
            if config[i] == 1 {
                let parity = if (n - 1 - i) % 2 == 0 { 1 } else { -1 };
                let later: i32 = config[i + 1..].iter().map(|&x| i32::from(x)).product();
                sign *= parity * later;
            }
        }
        Complex64::new(f64::from(sign), 0.0)
    }
}

/// Builds the z-basis state whose x-basis amplitudes follow `rule`,
/// normalised by `2^{−N/2}`.
pub fn state_from_rule<R: XConfigAmplitudeRule + ?Sized>(n: usize, rule: &R) -> Result<StateVector> {
    if n < 2 {
        return Err(Error::domain(format!("cluster states need at least 2 qubits, got {n}")));
    }
    if n >= 40 {
        return Err(Error::domain(format!(
            "{n} qubits is beyond any in-memory state vector"
        )));
    }
    let norm = (0.5f64).powf(n as f64 / 2.0);
    let mut config = vec![1i8; n];
    let mut amps = Vec::with_capacity(1 << n);
    for index in 0..1usize << n {
        for (k, c) in config.iter_mut().enumerate() {
            *c = if (index >> (n - 1 - k)) & 1 == 1 { -1 } else { 1 };
        }
        amps.push(rule.amplitude(&config) * norm);
    }
    walsh_hadamard(&mut amps);
    StateVector::new(n, amps, Basis::Z)
}

/// Nearest-neighbour cluster state `|φ_N⟩`.
pub fn closed_form_chain(n: usize) -> Result<StateVector> {
    state_from_rule(n, &ChainRule)
}

/// Long-range cluster state `|ψ_N⟩`.
pub fn closed_form_longrange(n: usize) -> Result<StateVector> {
    state_from_rule(n, &LongRangeRule)
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// `⟨s|P|s⟩` (the term coefficient included).
pub fn pauli_expectation(s: &StateVector, p: &PauliTerm) -> Result<f64> {
    let n = s.n_qubits();
    if p.max_qubit() > n {
        return Err(Error::domain(format!("term acts on qubit {} of {n}", p.max_qubit())));
    }
    let z;
    let amps = match s.basis() {
        Basis::Z => s.amplitudes(),
        Basis::X => {
            z = engine::from_x_basis(s)?;
            z.amplitudes()
        }
    };
    let (flip, sign, ys) = engine::masks(p, n);
    let phase = Complex64::i().powu(ys);
    let total: Complex64 = amps
        .iter()
        .enumerate()
        .map(|(b, a)| {
            let parity = if (b & sign).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            amps[b ^ flip].conj() * a * parity
        })
        .sum::<Complex64>()
        * phase;
    Ok(total.re * p.coefficient)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyBase {
    #[default]
    Bits,
    Nats,
}

/// Von Neumann entropy of `left_block` (a contiguous prefix `{1..k}` or
/// suffix `{k+1..N}` of 1-based qubit labels), in bits.
pub fn entanglement_entropy(s: &StateVector, left_block: &[usize]) -> Result<f64> {
    entanglement_entropy_in(s, left_block, EntropyBase::Bits)
}

pub fn entanglement_entropy_in(s: &StateVector, left_block: &[usize], base: EntropyBase) -> Result<f64> {
    let n = s.n_qubits();
    let k = left_block.len();
    if k == 0 || k >= n {
        return Err(Error::domain(format!("block of {k} qubits is not a proper cut of {n}")));
    }
    let prefix = left_block.iter().enumerate().all(|(i, &q)| q == i + 1);
    let suffix = left_block.iter().enumerate().all(|(i, &q)| q == n - k + 1 + i);
    let cut = match (prefix, suffix) {
        (true, _) => k,
        (_, true) => n - k,
        _ => {
            return Err(Error::domain(format!(
                "block {left_block:?} is not a contiguous prefix or suffix"
            )))
        }
    };
    cut_entropy(s, cut, base)
}

/// Entropy across the cut between qubits `cut` and `cut + 1`.
pub fn cut_entropy(s: &StateVector, cut: usize, base: EntropyBase) -> Result<f64> {
    let n = s.n_qubits();
    if cut == 0 || cut >= n {
        return Err(Error::domain(format!("cut {cut} is not internal to {n} qubits")));
    }
    // Schmidt coefficients are invariant under the local Walsh transform, so
    // either basis can be used directly.
    let rows = 1usize << cut;
    let cols = 1usize << (n - cut);
    let m = DMatrix::from_row_slice(rows, cols, s.amplitudes());
    let rho = if rows <= cols {
        &m * m.adjoint()
    } else {
        m.adjoint() * &m
    };
    let eig = SymmetricEigen::new(rho);
    let log = |p: f64| match base {
        EntropyBase::Bits => p.log2(),
        EntropyBase::Nats => p.ln(),
    };
    Ok(eig
        .eigenvalues
        .iter()
        .filter(|&&p| p > ENTROPY_CUTOFF)
        .map(|&p| -p * log(p))
        .sum::<f64>()
        .max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{evolve_diagonal, initial_all_zero, to_x_basis};
    use crate::model::{build_chain, build_longrange, Pauli};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn x_amps(s: &StateVector) -> Vec<f64> {
        to_x_basis(s).unwrap().amplitudes().iter().map(|a| a.re).collect()
    }

    /// Literal expansion of the N=2 chain product:
    /// (|−⟩ + |+⟩σ_x²)(|−⟩ + |+⟩) = |−−⟩ + |−+⟩ + |+−⟩ − |++⟩.
    #[test]
    fn chain_two_qubits_by_hand() {
        let amps = x_amps(&closed_form_chain(2).unwrap());
        for (a, b) in amps.iter().zip([0.5, 0.5, 0.5, -0.5]) {
            assert_relative_eq!(*a, b, epsilon = 1e-15);
        }
    }

    /// N=2 long-range: (|−⟩(−1)σ_x² + |+⟩)(|−⟩ + |+⟩)
    /// = −|−−⟩ + |−+⟩ + |+−⟩ + |++⟩.
    #[test]
    fn longrange_two_qubits_by_hand() {
        let amps = x_amps(&closed_form_longrange(2).unwrap());
        for (a, b) in amps.iter().zip([-0.5, 0.5, 0.5, 0.5]) {
            assert_relative_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn constructors_reject_single_qubit() {
        assert!(closed_form_chain(1).is_err());
        assert!(closed_form_longrange(0).is_err());
    }

    #[test]
    fn chain_sign_is_adjacent_plus_pairs() {
        // independent oracle: (−1)^{#adjacent ++}
        let n = 6;
        let amps = x_amps(&closed_form_chain(n).unwrap());
        for (b, a) in amps.iter().enumerate() {
            let pairs = (b & (b >> 1)).count_ones();
            let want = if pairs % 2 == 0 { 1.0 } else { -1.0 } / 8.0;
            assert_relative_eq!(*a, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn longrange_sign_is_binomial_of_minus_count() {
        // independent oracle: (−1)^{C(k,2)}, k = number of |−⟩ sites
        let n = 5;
        let amps = x_amps(&closed_form_longrange(n).unwrap());
        for (b, a) in amps.iter().enumerate() {
            let k = n as u32 - b.count_ones();
            let pairs = k * k.saturating_sub(1) / 2;
            let want = if pairs % 2 == 0 { 1.0 } else { -1.0 } * (0.5f64).powf(2.5);
            assert_relative_eq!(*a, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn evolution_matches_for_three_qubits() {
        let g = 2.0;
        let s0 = initial_all_zero(3).unwrap();
        let chain = evolve_diagonal(&s0, &build_chain(3, g).unwrap(), PI / g).unwrap();
        assert!(fidelity(&chain, &closed_form_chain(3).unwrap()).unwrap() > 1.0 - 1e-9);
        let lr = evolve_diagonal(&s0, &build_longrange(3, g).unwrap(), PI / g).unwrap();
        assert!(fidelity(&lr, &closed_form_longrange(3).unwrap()).unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn fidelity_examples() {
        let zero = initial_all_zero(1).unwrap();
        let one = StateVector::basis_state(1, 1, Basis::Z).unwrap();
        assert_eq!(fidelity(&zero, &one).unwrap(), 0.0);
        let s = closed_form_chain(4).unwrap();
        assert_relative_eq!(fidelity(&s, &s).unwrap(), 1.0, epsilon = 1e-14);
        let rotated = s.clone().with_global_phase(1.234);
        assert_relative_eq!(fidelity(&s, &rotated).unwrap(), 1.0, epsilon = 1e-14);
        assert!(matches!(
            fidelity(&s, &closed_form_chain(3).unwrap()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn pauli_examples() {
        let zero = initial_all_zero(1).unwrap();
        assert_eq!(
            pauli_expectation(&zero, &PauliTerm::single(1.0, 1, Pauli::Z)).unwrap(),
            1.0
        );
        assert_eq!(
            pauli_expectation(&zero, &PauliTerm::single(1.0, 1, Pauli::X)).unwrap(),
            0.0
        );
    }

    #[test]
    fn pauli_matches_dense_oracle_on_cluster() {
        let s = closed_form_chain(2).unwrap();
        let v = nalgebra::DVector::from_column_slice(s.amplitudes());
        for (p, q) in [
            (Pauli::X, Pauli::X),
            (Pauli::Z, Pauli::Z),
            (Pauli::X, Pauli::Z),
            (Pauli::Y, Pauli::Y),
        ] {
            let term = PauliTerm::pair(1.0, 1, p, 2, q);
            let h = engine::dense_matrix(std::slice::from_ref(&term), 2).unwrap();
            let oracle = (v.adjoint() * &h * &v)[(0, 0)];
            assert!(oracle.im.abs() < 1e-12);
            assert_relative_eq!(pauli_expectation(&s, &term).unwrap(), oracle.re, epsilon = 1e-12);
        }
        // in the x basis the N=2 chain has ⟨σ_x σ_x⟩ = 0 and ⟨σ_x⊗1⟩ = 0
        let xx = pauli_expectation(&s, &PauliTerm::pair(1.0, 1, Pauli::X, 2, Pauli::X)).unwrap();
        assert!(xx.abs() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        let prod = initial_all_zero(4).unwrap();
        for k in 1..4 {
            assert!(cut_entropy(&prod, k, EntropyBase::Bits).unwrap().abs() < 1e-12);
        }
        let bell = closed_form_chain(2).unwrap();
        assert_relative_eq!(entanglement_entropy(&bell, &[1]).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(
            entanglement_entropy_in(&bell, &[1], EntropyBase::Nats).unwrap(),
            std::f64::consts::LN_2,
            epsilon = 1e-12
        );
        assert!(entanglement_entropy(&bell, &[]).is_err());
        let s = closed_form_chain(4).unwrap();
        assert!(entanglement_entropy(&s, &[2, 3]).is_err());
        assert_relative_eq!(
            entanglement_entropy(&s, &[1]).unwrap(),
            entanglement_entropy(&s, &[2, 3, 4]).unwrap(),
            epsilon = 1e-10
        );
    }

    /// Partial-trace oracle built by explicit loops rather than the Gram matrix.
    fn entropy_oracle(s: &StateVector, k: usize) -> f64 {
        let n = s.n_qubits();
        let (da, db) = (1usize << k, 1usize << (n - k));
        let a = s.amplitudes();
        let mut rho = DMatrix::<Complex64>::zeros(da, da);
        for i in 0..da {
            for j in 0..da {
                rho[(i, j)] = (0..db).map(|b| a[i * db + b] * a[j * db + b].conj()).sum();
            }
        }
        let e = rho.symmetric_eigenvalues();
        e.iter().filter(|&&p| p > 1e-14).map(|&p| -p * p.log2()).sum()
    }

    #[test]
    fn chain_bond_entropy_is_one_bit() {
        for n in 2..=8 {
            let s = closed_form_chain(n).unwrap();
            for k in 1..n {
                let e = cut_entropy(&s, k, EntropyBase::Bits).unwrap();
                assert_relative_eq!(e, entropy_oracle(&s, k), epsilon = 1e-10);
                assert_relative_eq!(e, 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn large_states_are_normalised() {
        for n in [12, 16] {
            assert_relative_eq!(closed_form_chain(n).unwrap().norm_sqr(), 1.0, epsilon = 1e-12);
            assert_relative_eq!(closed_form_longrange(n).unwrap().norm_sqr(), 1.0, epsilon = 1e-12);
        }
    }
}
