//! Density-matrix evolution under gate-level depolarizing noise.
//!
//! Channel placement on a subsystem of width `d` and rank `R`:
//! one single-qubit channel per qubit for state preparation,
//! `⌈log₂ R⌉` two-qubit channels for the rank-superposition preparation,
//! one channel after every ansatz gate (single-qubit after `Ry`, two-qubit
//! after CNOT), and one single-qubit channel per qubit for the measurement
//! basis change.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::statevector::{pauli_action, pauli_phase};
use super::{AnsatzSpec, Gate, PiTensor};
use crate::error::{dim, invalid, DvqaError, Result};
use crate::pauli::PauliString;

/// Widest subsystem the dense density-matrix simulator accepts.
pub const MAX_NOISY_WIDTH: usize = 12;

/// Depolarizing probabilities: `ρ → (1−p)ρ + p·I/2ⁿ ⊗ Tr_n ρ` on the acted qubits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
}

impl NoiseModel {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        let n = NoiseModel { p1, p2 };
        n.validate()?;
        Ok(n)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(format!("{name} = {p} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Square operator on `n` qubits (not necessarily Hermitian), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    n: usize,
    data: Vec<Complex64>,
}

impl DensityOperator {
    /// `|alpha⟩⟨beta|`.
    pub fn outer(n: usize, alpha: usize, beta: usize) -> Result<Self> {
        let size = 1usize << n;
        if alpha >= size || beta >= size {
            return Err(dim(format!("basis indices ({alpha}, {beta}) out of range for {n} qubits")));
        }
        let mut data = vec![Complex64::new(0.0, 0.0); size * size];
        data[alpha * size + beta] = Complex64::new(1.0, 0.0);
        Ok(DensityOperator { n, data })
    }

    fn size(&self) -> usize {
        1 << self.n
    }

    fn mask(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    pub fn trace(&self) -> Complex64 {
        let s = self.size();
        (0..s).map(|i| self.data[i * s + i]).sum()
    }

    /// `R ρ R†` with `R = Ry(theta)` on qubit `q` (real rotation, so the same
    /// 2×2 map acts on row pairs and column pairs).
    pub fn ry(&mut self, q: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        let size = self.size();
        let m = self.mask(q);
        for r in 0..size {
            if r & m != 0 {
                continue;
            }
            for col in 0..size {
                let a0 = self.data[r * size + col];
                let a1 = self.data[(r | m) * size + col];
                self.data[r * size + col] = a0 * c - a1 * s;
                self.data[(r | m) * size + col] = a0 * s + a1 * c;
            }
        }
        for r in 0..size {
            let row = &mut self.data[r * size..(r + 1) * size];
            for col in 0..size {
                if col & m == 0 {
                    let a0 = row[col];
                    let a1 = row[col | m];
                    row[col] = a0 * c - a1 * s;
                    row[col | m] = a0 * s + a1 * c;
                }
            }
        }
    }

    pub fn cnot(&mut self, control: usize, target: usize) {
        let size = self.size();
        let cm = self.mask(control);
        let tm = self.mask(target);
        let perm = |i: usize| if i & cm != 0 { i ^ tm } else { i };
        let old = self.data.clone();
        for r in 0..size {
            let pr = perm(r);
            for col in 0..size {
                self.data[r * size + col] = old[pr * size + perm(col)];
            }
        }
    }

    pub fn depolarize1(&mut self, q: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let size = self.size();
        let m = self.mask(q);
        let keep = 1.0 - p;
        for r in 0..size {
            if r & m != 0 {
                continue;
            }
            for col in 0..size {
                if col & m != 0 {
                    continue;
                }
                let i00 = r * size + col;
                let i01 = r * size + (col | m);
                let i10 = (r | m) * size + col;
                let i11 = (r | m) * size + (col | m);
                let half_tr = (self.data[i00] + self.data[i11]) * (p / 2.0);
                self.data[i00] = self.data[i00] * keep + half_tr;
                self.data[i11] = self.data[i11] * keep + half_tr;
                self.data[i01] *= keep;
                self.data[i10] *= keep;
            }
        }
    }

    pub fn depolarize2(&mut self, q1: usize, q2: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let size = self.size();
        let (m1, m2) = (self.mask(q1), self.mask(q2));
        let subs = [0, m2, m1, m1 | m2];
        let keep = 1.0 - p;
        for r in 0..size {
            if r & (m1 | m2) != 0 {
                continue;
            }
            for col in 0..size {
                if col & (m1 | m2) != 0 {
                    continue;
                }
                let tr: Complex64 = subs.iter().map(|&s| self.data[(r | s) * size + (col | s)]).sum();
                for &a in &subs {
                    for &b in &subs {
                        let idx = (r | a) * size + (col | b);
                        self.data[idx] *= keep;
                        if a == b {
                            self.data[idx] += tr * (p / 4.0);
                        }
                    }
                }
            }
        }
    }

    /// `Tr(P ρ)`.
    pub fn expectation(&self, p: &PauliString) -> Complex64 {
        let size = self.size();
        let (flip, phases) = pauli_action(p, self.n, 0);
        (0..size)
            .map(|k| pauli_phase(&phases, k) * self.data[k * size + (k ^ flip)])
            .sum()
    }
}

fn rank_prep_channels(rank: usize) -> usize {
    if rank <= 1 {
        0
    } else {
        (usize::BITS - (rank - 1).leading_zeros()) as usize
    }
}

/// Evolve `|alpha⟩⟨beta|` through the noisy subsystem circuit.
pub(crate) fn evolve(
    spec: &AnsatzSpec,
    theta: &[f64],
    rank: usize,
    noise: &NoiseModel,
    alpha: usize,
    beta: usize,
) -> Result<DensityOperator> {
    let d = spec.num_qubits;
    if d > MAX_NOISY_WIDTH {
        return Err(DvqaError::TooLarge(format!(
            "subsystem width {d} exceeds the density-matrix limit {MAX_NOISY_WIDTH}"
        )));
    }
    spec.check_params(theta)?;
    let mut rho = DensityOperator::outer(d, alpha, beta)?;
    for q in 0..d {
        rho.depolarize1(q, noise.p1);
    }
    for j in 0..rank_prep_channels(rank) {
        if d >= 2 {
            let q = j % (d - 1);
            rho.depolarize2(q, q + 1, noise.p2);
        } else {
            rho.depolarize1(0, noise.p2);
        }
    }
    for gate in spec.gates() {
        match gate {
            Gate::Ry { qubit, param } => {
                rho.ry(qubit, theta[param]);
                rho.depolarize1(qubit, noise.p1);
            }
            Gate::Cnot { control, target } => {
                rho.cnot(control, target);
                rho.depolarize2(control, target, noise.p2);
            }
        }
    }
    for q in 0..d {
        rho.depolarize1(q, noise.p1);
    }
    Ok(rho)
}

/// Noisy `Π[α][β] = Tr(P·𝓔(U|α⟩⟨β|U†))`; `rank` sets the number of
/// rank-preparation channels.
#[allow(clippy::too_many_arguments)]
pub fn pi_noisy(
    spec: &AnsatzSpec,
    theta: &[f64],
    p: &PauliString,
    alpha: usize,
    beta: usize,
    noise: &NoiseModel,
    rank: usize,
) -> Result<Complex64> {
    noise.validate()?;
    if p.len() != spec.num_qubits {
        return Err(dim("factor length does not match subsystem width"));
    }
    if p.is_identity() {
        return Ok(Complex64::new(if alpha == beta { 1.0 } else { 0.0 }, 0.0));
    }
    Ok(evolve(spec, theta, rank, noise, alpha, beta)?.expectation(p))
}

pub(crate) fn evaluate_noisy(
    spec: &AnsatzSpec,
    theta: &[f64],
    rank: usize,
    factors: &[PauliString],
    noise: &NoiseModel,
    subsystem: usize,
) -> Result<Vec<PiTensor>> {
    let zero = Complex64::new(0.0, 0.0);
    let mut values = vec![vec![zero; rank * rank]; factors.len()];
    if factors.iter().any(|p| !p.is_identity()) {
        for a in 0..rank {
            for b in a..rank {
                let rho = evolve(spec, theta, rank, noise, a, b)?;
                for (f, p) in factors.iter().enumerate() {
                    if p.is_identity() {
                        continue;
                    }
                    // The channel preserves Hermiticity, so Π[β][α] = conj Π[α][β].
                    let v = rho.expectation(p);
                    values[f][a * rank + b] = v;
                    values[f][b * rank + a] = v.conj();
                }
            }
        }
    }
    Ok(factors
        .iter()
        .zip(values)
        .map(|(p, v)| {
            if p.is_identity() {
                PiTensor::identity(subsystem, p.clone(), rank)
            } else {
                PiTensor::from_values(subsystem, p.clone(), rank, &v)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::pi_exact;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_theta(spec: &AnsatzSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..spec.num_params()).map(|_| rng.random_range(-PI..PI)).collect()
    }

    #[test]
    fn noiseless_matches_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let spec = AnsatzSpec::new(3, 2);
        let clean = NoiseModel::new(0.0, 0.0).unwrap();
        for p in ["ZII", "XZY", "ZZZ"] {
            let p: PauliString = p.parse().unwrap();
            let theta = random_theta(&spec, &mut rng);
            for (a, b) in [(0, 0), (1, 4), (6, 3)] {
                let n = pi_noisy(&spec, &theta, &p, a, b, &clean, 8).unwrap();
                let e = pi_exact(&spec, &theta, &p, a, b).unwrap();
                assert!((n - e).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn full_single_qubit_depolarizing_kills_z() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let noise = NoiseModel::new(1.0, 0.0).unwrap();
        for (d, depth, p) in [(1, 0, "Z"), (1, 3, "Z"), (2, 2, "ZI"), (3, 1, "IIZ")] {
            let spec = AnsatzSpec::new(d, depth);
            let theta = random_theta(&spec, &mut rng);
            let v = pi_noisy(&spec, &theta, &p.parse().unwrap(), 0, 0, &noise, 1).unwrap();
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn two_qubit_circuit_loses_magnitude() {
        let spec = AnsatzSpec::new(2, 1);
        let theta = [0.2, -0.4, 0.1, 0.3];
        let p: PauliString = "ZZ".parse().unwrap();
        let noise = NoiseModel::new(0.01, 0.2).unwrap();
        let noisy = pi_noisy(&spec, &theta, &p, 0, 0, &noise, 1).unwrap();
        let exact = pi_exact(&spec, &theta, &p, 0, 0).unwrap();
        assert!(exact.norm() > 0.1);
        assert!(noisy.norm() < exact.norm());
    }

    #[test]
    fn trace_preserved_and_wide_rejected() {
        let spec = AnsatzSpec::new(3, 2);
        let noise = NoiseModel::new(0.05, 0.3).unwrap();
        let rho = evolve(&spec, &[0.4; 9], 4, &noise, 2, 2).unwrap();
        assert!((rho.trace() - 1.0).norm() < 1e-12);
        let wide = AnsatzSpec::new(13, 0);
        let err = pi_noisy(&wide, &[0.0; 13], &PauliString::z_on(13, &[0]), 0, 0, &noise, 1);
        assert!(matches!(err, Err(DvqaError::TooLarge(_))));
    }

    #[test]
    fn depolarize2_matches_single_qubit_pair_on_product_z() {
        // Z⊗I under two-qubit depolarizing decays by exactly (1 − p).
        let mut rho = DensityOperator::outer(2, 0, 0).unwrap();
        rho.depolarize2(0, 1, 0.3);
        let v = rho.expectation(&"ZI".parse().unwrap());
        assert!((v.re - 0.7).abs() < 1e-12);
    }

    #[test]
    fn invalid_probabilities() {
        assert!(NoiseModel::new(1.5, 0.0).is_err());
        assert!(NoiseModel::new(0.0, -0.1).is_err());
    }

    #[test]
    fn rank_channel_counts() {
        assert_eq!(rank_prep_channels(1), 0);
        assert_eq!(rank_prep_channels(2), 1);
        assert_eq!(rank_prep_channels(3), 2);
        assert_eq!(rank_prep_channels(4), 2);
        assert_eq!(rank_prep_channels(5), 3);
    }
}
