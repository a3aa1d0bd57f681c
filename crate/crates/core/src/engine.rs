//! State-vector evolution and computational-basis measurement.
//!
//! Amplitudes are indexed by bitstrings with qubit 1 as the most significant
//! bit. In the z basis bit 0/1 is `|0⟩`/`|1⟩`; in the x basis bit 0/1 is
//! `|−⟩`/`|+⟩` with `|±⟩ = (|0⟩ ∓ |1⟩)/√2`, so the change of basis is the
//! normalised Walsh–Hadamard transform in both directions.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, IsingXModel, Pauli, PauliTerm};

/// Allowed deviation of `Σ|a|²` from 1.
pub const NORM_TOLERANCE: f64 = 1e-12;
/// Amplitudes below this magnitude are left out of JSON snapshots.
pub const SNAPSHOT_CUTOFF: f64 = 1e-14;

const PARALLEL_MIN_LEN: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    #[serde(rename = "z_basis")]
    Z,
    #[serde(rename = "x_basis")]
    X,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
    basis: Basis,
}

impl StateVector {
    /// Wraps amplitudes after checking length `2^n` and unit norm.
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>, basis: Basis) -> Result<Self> {
        let s = Self::unchecked(n_qubits, amplitudes, basis)?;
        s.check_norm()?;
        Ok(s)
    }

    /// Like [`StateVector::new`] but rescales to unit norm.
    pub fn from_unnormalized(n_qubits: usize, mut amplitudes: Vec<Complex64>, basis: Basis) -> Result<Self> {
        let norm = amplitudes.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::domain("cannot normalise a zero or non-finite vector"));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::new(n_qubits, amplitudes, basis)
    }

    fn unchecked(n_qubits: usize, amplitudes: Vec<Complex64>, basis: Basis) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::domain("a state needs at least one qubit"));
        }
        if n_qubits >= usize::BITS as usize - 1 || amplitudes.len() != 1usize << n_qubits {
            return Err(Error::domain(format!(
                "{} amplitudes do not describe {} qubits",
                amplitudes.len(),
                n_qubits
            )));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
            basis,
        })
    }

    /// Computational (or x) basis state `|index⟩`.
    pub fn basis_state(n_qubits: usize, index: usize, basis: Basis) -> Result<Self> {
        if n_qubits == 0 || n_qubits >= usize::BITS as usize - 1 || index >= 1usize << n_qubits {
            return Err(Error::domain(format!(
                "index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::new(n_qubits, amps, basis)
    }

    /// Haar-like random state (normalised complex Gaussian vector).
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, basis: Basis, rng: &mut R) -> Result<Self> {
        let amps = (0..1usize << n_qubits)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::from_unnormalized(n_qubits, amps, basis)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    fn check_norm(&self) -> Result<()> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::domain(format!(
                "state norm {norm} deviates from 1 by more than {NORM_TOLERANCE:e}"
            )));
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::domain(format!(
                "states have {} and {} qubits",
                self.n_qubits, other.n_qubits
            )));
        }
        if self.basis != other.basis {
            return Err(Error::contract("states are expressed in different bases"));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Multiplies by a global phase `e^{iθ}`.
    pub fn with_global_phase(mut self, theta: f64) -> Self {
        let p = Complex64::from_polar(1.0, theta);
        self.amplitudes.iter_mut().for_each(|a| *a *= p);
        self
    }

    pub fn to_snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            n_qubits: self.n_qubits,
            basis: self.basis,
            amplitudes: self
                .amplitudes
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm() > SNAPSHOT_CUTOFF)
                .map(|(i, a)| (i, a.re, a.im))
                .collect(),
        }
    }

    pub fn from_snapshot(snap: &StateSnapshot) -> Result<Self> {
        if snap.n_qubits == 0 || snap.n_qubits >= usize::BITS as usize - 1 {
            return Err(Error::domain("snapshot qubit count out of range"));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << snap.n_qubits];
        for &(i, re, im) in &snap.amplitudes {
            let slot = amps
                .get_mut(i)
                .ok_or_else(|| Error::domain(format!("snapshot index {i} out of range")))?;
            *slot = Complex64::new(re, im);
        }
        // dropped amplitudes are below 1e-14 each, so renormalise
        Self::from_unnormalized(snap.n_qubits, amps, snap.basis)
    }
}

/// JSON form of a state: `(index, re, im)` triples above [`SNAPSHOT_CUTOFF`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSnapshot {
    pub n_qubits: usize,
    pub basis: Basis,
    pub amplitudes: Vec<(usize, f64, f64)>,
}

/// `|0…0⟩` in the z basis.
pub fn initial_all_zero(n: usize) -> Result<StateVector> {
    StateVector::basis_state(n, 0, Basis::Z)
}

/// In-place normalised Walsh–Hadamard transform, `O(N·2^N)`.
pub fn walsh_hadamard(amps: &mut [Complex64]) {
    let len = amps.len();
    debug_assert!(len.is_power_of_two());
    let butterfly = |lo: &mut [Complex64], hi: &mut [Complex64]| {
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = (x + y) * FRAC_1_SQRT_2;
            *b = (x - y) * FRAC_1_SQRT_2;
        }
    };
    let mut half = 1;
    while half < len {
        if len < PARALLEL_MIN_LEN {
            amps.chunks_mut(2 * half).for_each(|c| {
                let (lo, hi) = c.split_at_mut(half);
                butterfly(lo, hi);
            });
        } else if half < 1 << 12 {
            amps.par_chunks_mut(2 * half).for_each(|c| {
                let (lo, hi) = c.split_at_mut(half);
                butterfly(lo, hi);
            });
        } else {
            amps.chunks_mut(2 * half).for_each(|c| {
                let (lo, hi) = c.split_at_mut(half);
                lo.par_chunks_mut(1 << 10)
                    .zip(hi.par_chunks_mut(1 << 10))
                    .for_each(|(l, h)| butterfly(l, h));
            });
        }
        half *= 2;
    }
}

/// z basis to x basis.
pub fn to_x_basis(s: &StateVector) -> Result<StateVector> {
    if s.basis != Basis::Z {
        return Err(Error::contract("to_x_basis expects a z-basis state"));
    }
    let mut amps = s.amplitudes.clone();
    walsh_hadamard(&mut amps);
    StateVector::new(s.n_qubits, amps, Basis::X)
}

/// x basis to z basis.
pub fn from_x_basis(s: &StateVector) -> Result<StateVector> {
    if s.basis != Basis::X {
        return Err(Error::contract("from_x_basis expects an x-basis state"));
    }
    let mut amps = s.amplitudes.clone();
    walsh_hadamard(&mut amps);
    StateVector::new(s.n_qubits, amps, Basis::Z)
}

/// Qubit-count ceilings for the two evolution paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Guards {
    pub max_dense_qubits: usize,
    pub max_diagonal_qubits: usize,
}

impl Default for Guards {
    fn default() -> Self {
        Self {
            max_dense_qubits: 12,
            max_diagonal_qubits: 26,
        }
    }
}

impl Guards {
    pub const DENSE_ENV: &'static str = "CHARGEQ_MAX_DENSE_QUBITS";
    pub const DIAGONAL_ENV: &'static str = "CHARGEQ_MAX_DIAGONAL_QUBITS";

    /// Defaults, overridden by the environment variables when set and valid.
    pub fn from_env() -> Self {
        let read = |key: &str| std::env::var(key).ok().and_then(|v| v.trim().parse::<usize>().ok());
        let d = Self::default();
        Self {
            max_dense_qubits: read(Self::DENSE_ENV).unwrap_or(d.max_dense_qubits),
            max_diagonal_qubits: read(Self::DIAGONAL_ENV).unwrap_or(d.max_diagonal_qubits),
        }
    }

    fn check_dense(&self, n: usize) -> Result<()> {
        if n > self.max_dense_qubits {
            return Err(Error::Resource {
                what: "dense evolution",
                requested: n,
                limit: self.max_dense_qubits,
            });
        }
        Ok(())
    }

    fn check_diagonal(&self, n: usize) -> Result<()> {
        if n > self.max_diagonal_qubits {
            return Err(Error::Resource {
                what: "diagonal evolution",
                requested: n,
                limit: self.max_diagonal_qubits,
            });
        }
        Ok(())
    }
}

fn apply_phases<F>(amps: &mut [Complex64], angle: F)
where
    F: Fn(usize) -> f64 + Sync,
{
    let rotate = |(i, a): (usize, &mut Complex64)| {
        let (s, c) = angle(i).sin_cos();
        *a *= Complex64::new(c, -s);
    };
    if amps.len() >= PARALLEL_MIN_LEN {
        amps.par_iter_mut().enumerate().for_each(rotate);
    } else {
        amps.iter_mut().enumerate().for_each(rotate);
    }
}

/// `exp(−iHt/ħ)|s⟩` for an x-diagonal model: Walsh pass, one phase per
/// x-configuration, Walsh pass back.
pub fn evolve_diagonal(s: &StateVector, m: &IsingXModel, t: f64) -> Result<StateVector> {
    evolve_diagonal_with(s, m, t, &Guards::default())
}

pub fn evolve_diagonal_with(s: &StateVector, m: &IsingXModel, t: f64, guards: &Guards) -> Result<StateVector> {
    if s.basis != Basis::Z {
        return Err(Error::contract("evolve_diagonal expects a z-basis state"));
    }
    if m.n_qubits() != s.n_qubits {
        return Err(Error::domain(format!(
            "model has {} qubits, state has {}",
            m.n_qubits(),
            s.n_qubits
        )));
    }
    guards.check_diagonal(s.n_qubits)?;
    let mut amps = s.amplitudes.clone();
    walsh_hadamard(&mut amps);
    apply_phases(&mut amps, |i| m.angular_energy(i) * t);
    walsh_hadamard(&mut amps);
    StateVector::new(s.n_qubits, amps, Basis::Z)
}

/// Diagonal-path evolution for an arbitrary term list made only of σ_x
/// factors (e.g. a miscalibrated array at the degeneracy point).
pub fn evolve_x_terms(s: &StateVector, terms: &[PauliTerm], t: f64) -> Result<StateVector> {
    evolve_x_terms_with(s, terms, t, &Guards::default())
}

pub fn evolve_x_terms_with(s: &StateVector, terms: &[PauliTerm], t: f64, guards: &Guards) -> Result<StateVector> {
    if !model::is_x_diagonal(terms) {
        return Err(Error::contract(
            "the diagonal path needs a term list with σ_x factors only",
        ));
    }
    if s.basis != Basis::Z {
        return Err(Error::contract("evolution expects a z-basis state"));
    }
    let n = s.n_qubits;
    if model::qubit_span(terms) > n {
        return Err(Error::domain("term list acts on more qubits than the state has"));
    }
    guards.check_diagonal(n)?;
    let masks: Vec<(usize, f64)> = terms
        .iter()
        .map(|term| {
            let mask = term.factors.keys().fold(0usize, |m, &q| m | 1 << (n - q));
            (mask, 2.0 * PI * term.coefficient)
        })
        .collect();
    let mut amps = s.amplitudes.clone();
    walsh_hadamard(&mut amps);
    apply_phases(&mut amps, |i| {
        // bit 1 is |+⟩, σ_x eigenvalue −1
        let e: f64 = masks
            .iter()
            .map(|&(mask, w)| if (i & mask).count_ones() % 2 == 0 { w } else { -w })
            .sum();
        e * t
    });
    walsh_hadamard(&mut amps);
    StateVector::new(n, amps, Basis::Z)
}

/// Dense Hamiltonian matrix (GHz) in the z basis.
pub fn dense_matrix(terms: &[PauliTerm], n: usize) -> Result<DMatrix<Complex64>> {
    if model::qubit_span(terms) > n {
        return Err(Error::domain("term list acts on more qubits than requested"));
    }
    let dim = 1usize << n;
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for term in terms {
        let (flip, sign, ys) = masks(term, n);
        let base = Complex64::i().powu(ys) * term.coefficient;
        for col in 0..dim {
            let row = col ^ flip;
            let parity = if (col & sign).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            h[(row, col)] += base * parity;
        }
    }
    Ok(h)
}

pub(crate) fn masks(term: &PauliTerm, n: usize) -> (usize, usize, u32) {
    let (mut flip, mut sign, mut ys) = (0usize, 0usize, 0u32);
    for (&q, p) in &term.factors {
        let bit = 1usize << (n - q);
        match p {
            Pauli::X => flip |= bit,
            Pauli::Z => sign |= bit,
            Pauli::Y => {
                flip |= bit;
                sign |= bit;
                ys += 1;
            }
        }
    }
    (flip, sign, ys)
}

/// Brute-force `exp(−iHt/ħ)|s⟩` through a full Hermitian eigendecomposition.
pub fn evolve_dense(s: &StateVector, terms: &[PauliTerm], t: f64) -> Result<StateVector> {
    evolve_dense_with(s, terms, t, &Guards::default())
}

pub fn evolve_dense_with(s: &StateVector, terms: &[PauliTerm], t: f64, guards: &Guards) -> Result<StateVector> {
    if s.basis != Basis::Z {
        return Err(Error::contract("evolve_dense expects a z-basis state"));
    }
    let n = s.n_qubits;
    guards.check_dense(n)?;
    let h = dense_matrix(terms, n)?;
    let has_y = terms.iter().any(|t| t.factors.values().any(|p| *p == Pauli::Y));
    let dim = 1usize << n;
    let re = DVector::from_iterator(dim, s.amplitudes.iter().map(|a| a.re));
    let im = DVector::from_iterator(dim, s.amplitudes.iter().map(|a| a.im));
    let omega = 2.0 * PI * t;
    let (out_re, out_im) = if has_y {
        // Hermitian H as the real symmetric [[Re, −Im], [Im, Re]] acting on
        // (ψ_re, ψ_im); multiplication by i becomes J(x, y) = (−y, x).
        let mut big = DMatrix::<f64>::zeros(2 * dim, 2 * dim);
        for c in 0..dim {
            for r in 0..dim {
                let z = h[(r, c)];
                big[(r, c)] = z.re;
                big[(r + dim, c + dim)] = z.re;
                big[(r + dim, c)] = z.im;
                big[(r, c + dim)] = -z.im;
            }
        }
        let (vals, v) = symmetric_eigen(big);
        let mut x = DVector::<f64>::zeros(2 * dim);
        let mut jx = DVector::<f64>::zeros(2 * dim);
        for k in 0..dim {
            x[k] = re[k];
            x[k + dim] = im[k];
            jx[k] = -im[k];
            jx[k + dim] = re[k];
        }
        let a = v.transpose() * x;
        let b = v.transpose() * jx;
        let mixed = DVector::from_fn(2 * dim, |k, _| {
            let (sin, cos) = (omega * vals[k]).sin_cos();
            cos * a[k] - sin * b[k]
        });
        let y = v * mixed;
        (y.rows(0, dim).into_owned(), y.rows(dim, dim).into_owned())
    } else {
        // X/Z-only Hamiltonians are real symmetric
        let (vals, v) = symmetric_eigen(h.map(|z| z.re));
        let a = v.transpose() * re;
        let b = v.transpose() * im;
        let (mut cr, mut ci) = (a.clone(), b.clone());
        for k in 0..dim {
            let (sin, cos) = (omega * vals[k]).sin_cos();
            cr[k] = cos * a[k] + sin * b[k];
            ci[k] = cos * b[k] - sin * a[k];
        }
        (&v * cr, &v * ci)
    };
    let amps = out_re
        .iter()
        .zip(out_im.iter())
        .map(|(&r, &i)| Complex64::new(r, i))
        .collect();
    StateVector::new(n, amps, Basis::Z)
}

/// Eigenpairs of a real symmetric matrix.
///
/// nalgebra's QR iteration loses accuracy (≈√ε) on nearly degenerate
/// eigenvalues, which integer-spectrum Hamiltonians produce in abundance, so
/// its result is polished by threshold Jacobi sweeps on `VᵀHV`.
pub fn symmetric_eigen(h: DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let scale = h.amax();
    let mut v = SymmetricEigen::new(h.clone()).eigenvectors;
    let mut a = v.transpose() * &h * &v;
    let m = a.nrows();
    let threshold = 1e-14 * scale;
    for _ in 0..16 {
        let mut rotated = false;
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[(p, q)];
                if apq.abs() <= threshold {
                    continue;
                }
                rotated = true;
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let (x, y) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * x - s * y;
                    a[(k, q)] = s * x + c * y;
                }
                for k in 0..m {
                    let (x, y) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * x - s * y;
                    a[(q, k)] = s * x + c * y;
                }
                for k in 0..m {
                    let (x, y) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * x - s * y;
                    v[(k, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (a.diagonal(), v)
}

/// Outcome of a single-qubit projective measurement in `{|0⟩, |1⟩}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub qubit: usize,
    pub outcome: u8,
    pub probability: f64,
    pub post_state: StateVector,
}

fn check_qubit(s: &StateVector, qubit: usize) -> Result<usize> {
    if s.basis != Basis::Z {
        return Err(Error::contract("measurement expects a z-basis state"));
    }
    if qubit == 0 || qubit > s.n_qubits {
        return Err(Error::domain(format!("qubit {qubit} not in 1..={}", s.n_qubits)));
    }
    Ok(1usize << (s.n_qubits - qubit))
}

/// Born probability of `outcome` on `qubit`.
pub fn outcome_probability(s: &StateVector, qubit: usize, outcome: u8) -> Result<f64> {
    let bit = check_qubit(s, qubit)?;
    let want = if outcome == 0 { 0 } else { bit };
    Ok(s.amplitudes
        .iter()
        .enumerate()
        .filter(|(i, _)| i & bit == want)
        .map(|(_, a)| a.norm_sqr())
        .sum())
}

/// Projects onto a given outcome, renormalising the post-measurement state.
pub fn project_z(s: &StateVector, qubit: usize, outcome: u8) -> Result<MeasurementRecord> {
    if outcome > 1 {
        return Err(Error::domain("outcome must be 0 or 1"));
    }
    let bit = check_qubit(s, qubit)?;
    let p = outcome_probability(s, qubit, outcome)?;
    if p <= 0.0 {
        return Err(Error::domain(format!(
            "outcome {outcome} on qubit {qubit} has zero probability"
        )));
    }
    let want = if outcome == 0 { 0 } else { bit };
    let scale = p.sqrt().recip();
    let amps = s
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, a)| {
            if i & bit == want {
                a * scale
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok(MeasurementRecord {
        qubit,
        outcome,
        probability: p,
        post_state: StateVector::from_unnormalized(s.n_qubits, amps, Basis::Z)?,
    })
}

/// Born-rule sample of `qubit`. Forced outcomes (probability 0 or 1) do not
/// consume randomness.
pub fn measure_z<R: Rng + ?Sized>(s: &StateVector, qubit: usize, rng: &mut R) -> Result<MeasurementRecord> {
    let p0 = outcome_probability(s, qubit, 0)?;
    let outcome = if p0 >= 1.0 - NORM_TOLERANCE {
        0
    } else if p0 <= NORM_TOLERANCE {
        1
    } else if rng.gen::<f64>() < p0 {
        0
    } else {
        1
    };
    project_z(s, qubit, outcome)
}

/// [`measure_z`] with a ChaCha stream; `None` uses seed 0.
pub fn measure_z_seeded(s: &StateVector, qubit: usize, seed: Option<u64>) -> Result<MeasurementRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
    measure_z(s, qubit, &mut rng)
}
