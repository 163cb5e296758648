//! Per-subsystem circuit simulation.
//!
//! Each subsystem runs a hardware-efficient ansatz `U_k(θ_k)` on `d_k` qubits.
//! The engine produces the local transition tensors
//! `Π_k[α][β] = ⟨β|U_k† P U_k|α⟩` for the first `R_k` computational basis
//! states, either exactly, from simulated Hadamard-test shots, or under
//! gate-level depolarizing noise.

mod density;
mod hadamard;
mod statevector;

use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{dim, invalid, Result};
use crate::pauli::PauliString;

pub use density::{pi_noisy, DensityOperator, NoiseModel, MAX_NOISY_WIDTH};
pub use hadamard::{pi_hadamard_estimate, hadamard_expectations};
pub use statevector::StateVector;

/// Layered ansatz: an initial `Ry` layer, then `depth` repetitions of a
/// nearest-neighbour CNOT ladder followed by another `Ry` layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub num_qubits: usize,
    pub depth: usize,
}

/// One gate of the ansatz; `Ry` carries the index of its parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Ry { qubit: usize, param: usize },
    Cnot { control: usize, target: usize },
}

impl AnsatzSpec {
    pub fn new(num_qubits: usize, depth: usize) -> Self {
        AnsatzSpec { num_qubits, depth }
    }

    pub fn num_params(&self) -> usize {
        self.num_qubits * (self.depth + 1)
    }

    pub fn num_cnots(&self) -> usize {
        self.depth * self.num_qubits.saturating_sub(1)
    }

    pub fn gates(&self) -> impl Iterator<Item = Gate> + '_ {
        let d = self.num_qubits;
        let ry_layer = move |layer: usize| {
            (0..d).map(move |q| Gate::Ry {
                qubit: q,
                param: layer * d + q,
            })
        };
        ry_layer(0).chain((1..=self.depth).flat_map(move |layer| {
            (0..d.saturating_sub(1))
                .map(|j| Gate::Cnot {
                    control: j,
                    target: j + 1,
                })
                .chain(ry_layer(layer))
        }))
    }

    pub fn check_params(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.num_params() {
            return Err(dim(format!(
                "ansatz on {} qubits at depth {} takes {} parameters, got {}",
                self.num_qubits,
                self.depth,
                self.num_params(),
                theta.len()
            )));
        }
        Ok(())
    }

    /// `|index⟩` on this subsystem.
    pub fn prepare_basis(&self, index: usize) -> Result<StateVector> {
        StateVector::basis(self.num_qubits, index)
    }

    pub fn apply(&self, theta: &[f64], state: &StateVector) -> Result<StateVector> {
        if state.num_qubits() != self.num_qubits {
            return Err(dim("state width does not match the ansatz"));
        }
        let mut out = state.clone();
        self.apply_at(theta, &mut out, 0)?;
        Ok(out)
    }

    /// Apply the ansatz to qubits `offset..offset + num_qubits` of a larger register.
    pub fn apply_at(&self, theta: &[f64], state: &mut StateVector, offset: usize) -> Result<()> {
        self.check_params(theta)?;
        for gate in self.gates() {
            match gate {
                Gate::Ry { qubit, param } => state.ry(offset + qubit, theta[param]),
                Gate::Cnot { control, target } => state.cnot(offset + control, offset + target),
            }
        }
        Ok(())
    }
}

/// How Π entries are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EvalMode {
    Exact,
    /// Hadamard-test estimates with this many shots per real/imaginary circuit.
    Shots(u64),
    Noisy(NoiseModel),
}

impl EvalMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EvalMode::Exact => Ok(()),
            EvalMode::Shots(0) => Err(invalid("shots must be at least 1")),
            EvalMode::Shots(_) => Ok(()),
            EvalMode::Noisy(n) => n.validate(),
        }
    }
}

/// Counts simulated Hadamard-test circuit executions.
#[derive(Debug, Default)]
pub struct CircuitCounter(AtomicU64);

impl CircuitCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&self, n: u64) {
        self.0.fetch_add(n, Ordering::Relaxed);
    }

    pub fn count(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }
}

/// Transition tensor of one subsystem for one local Pauli factor.
///
/// Stored as the operator `A[β][α] = Π[α][β] = ⟨β|U†PU|α⟩`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PiTensor {
    pub subsystem: usize,
    pub factor: PauliString,
    rank: usize,
    op: Vec<Complex64>,
}

impl PiTensor {
    pub fn identity(subsystem: usize, factor: PauliString, rank: usize) -> Self {
        let mut op = vec![Complex64::new(0.0, 0.0); rank * rank];
        for a in 0..rank {
            op[a * rank + a] = Complex64::new(1.0, 0.0);
        }
        PiTensor {
            subsystem,
            factor,
            rank,
            op,
        }
    }

    /// Build from `values[α][β]` given row-major.
    pub fn from_values(subsystem: usize, factor: PauliString, rank: usize, values: &[Complex64]) -> Self {
        assert_eq!(values.len(), rank * rank);
        let mut op = vec![Complex64::new(0.0, 0.0); rank * rank];
        for a in 0..rank {
            for b in 0..rank {
                op[b * rank + a] = values[a * rank + b];
            }
        }
        PiTensor {
            subsystem,
            factor,
            rank,
            op,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `Π[α][β]`.
    pub fn value(&self, alpha: usize, beta: usize) -> Complex64 {
        self.op[beta * self.rank + alpha]
    }

    /// Row-major `A` with `A[β][α] = Π[α][β]`.
    pub fn operator(&self) -> &[Complex64] {
        &self.op
    }

    /// `max |A − A†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let r = self.rank;
        let mut worst = 0.0f64;
        for i in 0..r {
            for j in 0..r {
                worst = worst.max((self.op[i * r + j] - self.op[j * r + i].conj()).norm());
            }
        }
        worst
    }

    fn hermitize(&mut self) {
        let r = self.rank;
        for i in 0..r {
            self.op[i * r + i].im = 0.0;
            for j in (i + 1)..r {
                let avg = (self.op[i * r + j] + self.op[j * r + i].conj()) * 0.5;
                self.op[i * r + j] = avg;
                self.op[j * r + i] = avg.conj();
            }
        }
    }
}

/// `⟨β|U†PU|α⟩` by state-vector arithmetic.
pub fn pi_exact(spec: &AnsatzSpec, theta: &[f64], p: &PauliString, alpha: usize, beta: usize) -> Result<Complex64> {
    check_factor(spec, p)?;
    let ua = spec.apply(theta, &spec.prepare_basis(alpha)?)?;
    let ub = spec.apply(theta, &spec.prepare_basis(beta)?)?;
    let mut pua = ua;
    pua.apply_pauli(p, 0);
    Ok(ub.inner(&pua))
}

/// Full `R × R` exact tensor.
pub fn pi_matrix(spec: &AnsatzSpec, theta: &[f64], p: &PauliString, rank: usize) -> Result<PiTensor> {
    let mut out = evaluate_subsystem(spec, theta, rank, std::slice::from_ref(p), &EvalMode::Exact, 0, 0, None)?;
    Ok(out.pop().unwrap())
}

fn check_factor(spec: &AnsatzSpec, p: &PauliString) -> Result<()> {
    if p.len() != spec.num_qubits {
        return Err(dim(format!(
            "factor {p} has {} letters, subsystem has {} qubits",
            p.len(),
            spec.num_qubits
        )));
    }
    Ok(())
}

fn check_rank(spec: &AnsatzSpec, rank: usize) -> Result<()> {
    if rank == 0 || (spec.num_qubits < 63 && rank > 1usize << spec.num_qubits) {
        return Err(invalid(format!(
            "rank {rank} exceeds subsystem dimension 2^{}",
            spec.num_qubits
        )));
    }
    Ok(())
}

/// Evaluate the Π tensors of several local factors on one subsystem at a
/// single parameter point.
///
/// Identity factors are returned as exact identities in every mode. In shot
/// mode each non-identity factor issues `2·R²` Hadamard-test circuits (one
/// real and one imaginary branch per `(α, β)`), each with its own random
/// stream derived from `(seed, subsystem, factor, α, β, branch)`; the
/// estimate is then projected onto Hermitian operators.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_subsystem(
    spec: &AnsatzSpec,
    theta: &[f64],
    rank: usize,
    factors: &[PauliString],
    mode: &EvalMode,
    seed: u64,
    subsystem: usize,
    counter: Option<&CircuitCounter>,
) -> Result<Vec<PiTensor>> {
    spec.check_params(theta)?;
    check_rank(spec, rank)?;
    for p in factors {
        check_factor(spec, p)?;
    }
    let zero = Complex64::new(0.0, 0.0);
    match mode {
        EvalMode::Exact => {
            let states = (0..rank)
                .map(|a| spec.apply(theta, &spec.prepare_basis(a)?))
                .collect::<Result<Vec<_>>>()?;
            Ok(factors
                .iter()
                .map(|p| {
                    if p.is_identity() {
                        return PiTensor::identity(subsystem, p.clone(), rank);
                    }
                    let mut values = vec![zero; rank * rank];
                    for (a, sa) in states.iter().enumerate() {
                        let mut psa = sa.clone();
                        psa.apply_pauli(p, 0);
                        for (b, sb) in states.iter().enumerate() {
                            values[a * rank + b] = sb.inner(&psa);
                        }
                    }
                    PiTensor::from_values(subsystem, p.clone(), rank, &values)
                })
                .collect())
        }
        EvalMode::Shots(shots) => {
            mode.validate()?;
            factors
                .iter()
                .map(|p| {
                    if p.is_identity() {
                        return Ok(PiTensor::identity(subsystem, p.clone(), rank));
                    }
                    let mut values = vec![zero; rank * rank];
                    for a in 0..rank {
                        for b in 0..rank {
                            let s = stream_seed(&[seed, subsystem as u64, factor_key(p), a as u64, b as u64]);
                            values[a * rank + b] = pi_hadamard_estimate(spec, theta, p, a, b, *shots, s)?;
                        }
                    }
                    if let Some(c) = counter {
                        c.add(2 * (rank * rank) as u64);
                    }
                    let mut t = PiTensor::from_values(subsystem, p.clone(), rank, &values);
                    t.hermitize();
                    Ok(t)
                })
                .collect()
        }
        EvalMode::Noisy(noise) => {
            noise.validate()?;
            density::evaluate_noisy(spec, theta, rank, factors, noise, subsystem)
        }
    }
}

/// Stable 64-bit key of a Pauli factor, used to derive random streams.
pub fn factor_key(p: &PauliString) -> u64 {
    p.ops()
        .iter()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, op| {
            (h ^ (op.as_char() as u64)).wrapping_mul(0x0000_0100_0000_01b3)
        })
}

/// Mix several words into one seed (SplitMix64 finalizer per word).
pub fn stream_seed(parts: &[u64]) -> u64 {
    let mut h = 0x9e37_79b9_7f4a_7c15u64;
    for &p in parts {
        h = splitmix(h ^ splitmix(p));
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
