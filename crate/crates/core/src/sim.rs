//! Statevector simulation of QAOA circuits and seeded shot sampling.
//!
//! Amplitude `k` belongs to the basis state whose qubit 0 is the most
//! significant bit of `k`, matching [`crate::spin::spin_energy_table`].
//! Sampling uses ChaCha8 seeded through `SeedableRng::seed_from_u64`, so a
//! seed reproduces the same shots on every platform.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{Gate, GateCircuit};
use crate::poly::{PolyError, SpinPoly};

pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("{qubits} qubits exceeds the simulator limit of {limit}")]
    Capacity { qubits: usize, limit: usize },
    #[error("gate {index} ({gate}) has an unbound parameter")]
    Unbound { index: usize, gate: String },
    #[error("energy table has {got} entries, state has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("got {gammas} gammas and {betas} betas")]
    ParameterCount { gammas: usize, betas: usize },
    #[error("energy table length {0} is not a power of two")]
    TableLength(usize),
    #[error("shot count must be at least 1")]
    NoShots,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

impl SimError {
    pub fn is_capacity(&self) -> bool {
        matches!(self, SimError::Capacity { .. }) || matches!(self, SimError::Poly(p) if p.is_capacity())
    }
}

fn check_capacity(qubits: usize) -> Result<(), SimError> {
    if qubits > MAX_QUBITS {
        return Err(SimError::Capacity {
            qubits,
            limit: MAX_QUBITS,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero_state(num_qubits: usize) -> Result<Self, SimError> {
        check_capacity(num_qubits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amps })
    }

    /// `|+⟩^⊗n`.
    pub fn uniform(num_qubits: usize) -> Result<Self, SimError> {
        check_capacity(num_qubits)?;
        let a = Complex64::new((0.5f64).powf(num_qubits as f64 / 2.0), 0.0);
        Ok(Self {
            num_qubits,
            amps: vec![a; 1 << num_qubits],
        })
    }

    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self, SimError> {
        let mut s = Self::zero_state(num_qubits)?;
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, SimError> {
        if !amps.len().is_power_of_two() {
            return Err(SimError::TableLength(amps.len()));
        }
        let num_qubits = amps.len().trailing_zeros() as usize;
        check_capacity(num_qubits)?;
        Ok(Self { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    /// Applies the 2×2 matrix `[[a, b], [c, d]]` to `qubit`.
    fn apply_single(&mut self, qubit: usize, m: [[Complex64; 2]; 2]) {
        let mask = self.mask(qubit);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let (x, y) = (self.amps[i], self.amps[i | mask]);
                self.amps[i] = m[0][0] * x + m[0][1] * y;
                self.amps[i | mask] = m[1][0] * x + m[1][1] * y;
            }
        }
    }

    pub fn apply_h(&mut self, qubit: usize) {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        self.apply_single(qubit, [[h, h], [h, -h]]);
    }

    pub fn apply_rx(&mut self, qubit: usize, theta: f64) {
        let c = Complex64::new((theta / 2.0).cos(), 0.0);
        let s = Complex64::new(0.0, -(theta / 2.0).sin());
        self.apply_single(qubit, [[c, s], [s, c]]);
    }

    pub fn apply_rz(&mut self, qubit: usize, theta: f64) {
        let mask = self.mask(qubit);
        let lo = Complex64::from_polar(1.0, -theta / 2.0);
        let hi = Complex64::from_polar(1.0, theta / 2.0);
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if i & mask == 0 { lo } else { hi };
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let (cm, tm) = (self.mask(control), self.mask(target));
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
    }

    /// `exp(-i (θ/2) Z_T)`: the phase depends on the parity of the support bits.
    pub fn apply_phase_gadget(&mut self, support: &[usize], theta: f64) {
        let mask = support.iter().fold(0, |m, &q| m | self.mask(q));
        let even = Complex64::from_polar(1.0, -theta / 2.0);
        let odd = Complex64::from_polar(1.0, theta / 2.0);
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if (i & mask).count_ones() % 2 == 0 { even } else { odd };
        }
    }

    /// Multiplies amplitude `k` by `exp(-i·γ·energy[k])`.
    pub fn apply_diagonal_phase(&mut self, energy: &[f64], gamma: f64) -> Result<(), SimError> {
        self.check_table(energy)?;
        for (a, &e) in self.amps.iter_mut().zip(energy) {
            *a *= Complex64::from_polar(1.0, -gamma * e);
        }
        Ok(())
    }

    fn check_table(&self, energy: &[f64]) -> Result<(), SimError> {
        if energy.len() != self.amps.len() {
            return Err(SimError::DimensionMismatch {
                expected: self.amps.len(),
                got: energy.len(),
            });
        }
        Ok(())
    }

    /// `Σ_k |amp_k|² · energy[k]`.
    pub fn expectation(&self, energy: &[f64]) -> Result<f64, SimError> {
        self.check_table(energy)?;
        Ok(self.amps.iter().zip(energy).map(|(a, e)| a.norm_sqr() * e).sum())
    }
}

/// Runs a fully bound circuit from `|0…0⟩`.
pub fn simulate_gates(c: &GateCircuit) -> Result<StateVector, SimError> {
    let mut sv = StateVector::zero_state(c.width())?;
    for (index, g) in c.gates().iter().enumerate() {
        let theta = match g.angle() {
            Some(a) => Some(a.literal().ok_or_else(|| SimError::Unbound {
                index,
                gate: g.to_string(),
            })?),
            None => None,
        };
        match g {
            Gate::H(q) => sv.apply_h(*q),
            Gate::Rx(q, _) => sv.apply_rx(*q, theta.unwrap_or_default()),
            Gate::Rz(q, _) => sv.apply_rz(*q, theta.unwrap_or_default()),
            Gate::Cnot { control, target } => sv.apply_cnot(*control, *target),
            Gate::PhaseGadget { support, .. } => sv.apply_phase_gadget(support, theta.unwrap_or_default()),
        }
    }
    Ok(sv)
}

/// QAOA evolution from the uniform state driven directly by a diagonal
/// energy table.
pub fn evolve_diagonal(energy: &[f64], gammas: &[f64], betas: &[f64]) -> Result<StateVector, SimError> {
    if gammas.len() != betas.len() {
        return Err(SimError::ParameterCount {
            gammas: gammas.len(),
            betas: betas.len(),
        });
    }
    if !energy.len().is_power_of_two() {
        return Err(SimError::TableLength(energy.len()));
    }
    let n = energy.len().trailing_zeros() as usize;
    let mut sv = StateVector::uniform(n)?;
    for (&g, &b) in gammas.iter().zip(betas) {
        sv.apply_diagonal_phase(energy, g)?;
        for q in 0..n {
            sv.apply_rx(q, 2.0 * b);
        }
    }
    Ok(sv)
}

/// Fast path for the QAOA state of `h`. Unlike [`simulate_gates`] it keeps
/// the constant term, which only changes the global phase.
pub fn simulate_fast(h: &SpinPoly, gammas: &[f64], betas: &[f64]) -> Result<StateVector, SimError> {
    check_capacity(h.num_bits())?;
    evolve_diagonal(&h.energy_table()?, gammas, betas)
}

pub fn expectation(sv: &StateVector, energy: &[f64]) -> Result<f64, SimError> {
    sv.expectation(energy)
}

/// Measurement outcomes keyed by basis index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleSet {
    pub shots: usize,
    pub seed: u64,
    pub counts: BTreeMap<usize, usize>,
}

impl SampleSet {
    /// Every shot in index order, repeated by count.
    pub fn outcomes(&self) -> impl Iterator<Item = usize> + '_ {
        self.counts
            .iter()
            .flat_map(|(&k, &c)| std::iter::repeat_n(k, c))
    }

    pub fn mean(&self, energy: &[f64]) -> f64 {
        let total: f64 = self.counts.iter().map(|(&k, &c)| energy[k] * c as f64).sum();
        total / self.shots as f64
    }
}

/// Draws `shots` independent measurements in the computational basis.
pub fn sample(sv: &StateVector, shots: usize, seed: u64) -> Result<SampleSet, SimError> {
    if shots == 0 {
        return Err(SimError::NoShots);
    }
    let dist = WeightedIndex::new(sv.probabilities())
        .expect("a normalized state has positive total weight");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        *counts.entry(dist.sample(&mut rng)).or_insert(0) += 1;
    }
    Ok(SampleSet { shots, seed, counts })
}
