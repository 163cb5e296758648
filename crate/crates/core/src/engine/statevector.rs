use num_complex::Complex64;

use crate::error::{dim, Result};
use crate::pauli::{PauliOp, PauliString};

/// Pure state over `num_qubits` qubits; qubit 0 is the most significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        let size = 1usize << num_qubits;
        if index >= size {
            return Err(dim(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); size];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { num_qubits, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(dim(format!("{} amplitudes is not a power of two", amps.len())));
        }
        let num_qubits = amps.len().trailing_zeros() as usize;
        Ok(StateVector { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    #[inline]
    fn mask(&self, q: usize) -> usize {
        1 << (self.num_qubits - 1 - q)
    }

    /// `exp(−iθY/2)` on qubit `q`.
    pub fn ry(&mut self, q: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        let m = self.mask(q);
        for i in 0..self.amps.len() {
            if i & m == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | m];
                self.amps[i] = a0 * c - a1 * s;
                self.amps[i | m] = a0 * s + a1 * c;
            }
        }
    }

    pub fn hadamard(&mut self, q: usize) {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let m = self.mask(q);
        for i in 0..self.amps.len() {
            if i & m == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | m];
                self.amps[i] = (a0 + a1) * r;
                self.amps[i | m] = (a0 - a1) * r;
            }
        }
    }

    /// `S† = diag(1, −i)` on qubit `q`.
    pub fn s_dagger(&mut self, q: usize) {
        let m = self.mask(q);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & m != 0 {
                *a *= Complex64::new(0.0, -1.0);
            }
        }
    }

    pub fn cnot(&mut self, control: usize, target: usize) {
        let cm = self.mask(control);
        let tm = self.mask(target);
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
    }

    /// Apply a Pauli string to qubits `offset..offset + p.len()`.
    pub fn apply_pauli(&mut self, p: &PauliString, offset: usize) {
        let (flip, phases) = pauli_action(p, self.num_qubits, offset);
        let old = self.amps.clone();
        for (r, &a) in old.iter().enumerate() {
            self.amps[r ^ flip] = a * pauli_phase(&phases, r);
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Bit mask flipped by the X/Y letters of `p` (placed at `offset` in a
/// register of `n` qubits) and the per-qubit phase data needed by
/// [`pauli_phase`].
pub(crate) fn pauli_action(p: &PauliString, n: usize, offset: usize) -> (usize, PauliPhases) {
    let mut flip = 0usize;
    let mut z_mask = 0usize;
    let mut y_mask = 0usize;
    for (j, &op) in p.ops().iter().enumerate() {
        let m = 1usize << (n - 1 - (offset + j));
        match op {
            PauliOp::I => {}
            PauliOp::X => flip |= m,
            PauliOp::Y => {
                flip |= m;
                y_mask |= m;
            }
            PauliOp::Z => z_mask |= m,
        }
    }
    (
        flip,
        PauliPhases {
            z_mask,
            y_mask,
            y_count: y_mask.count_ones(),
        },
    )
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct PauliPhases {
    z_mask: usize,
    y_mask: usize,
    y_count: u32,
}

/// Phase picked up by basis state `|r⟩` under the Pauli string:
/// `P|r⟩ = phase(r)·|r ⊕ flip⟩`, using `Y|0⟩ = i|1⟩`, `Y|1⟩ = −i|0⟩`.
#[inline]
pub(crate) fn pauli_phase(ph: &PauliPhases, r: usize) -> Complex64 {
    // Each Y contributes i·(−1)^bit, each Z contributes (−1)^bit.
    let sign_bits = (r & ph.z_mask).count_ones() + (r & ph.y_mask).count_ones();
    let mut v = match ph.y_count % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    if sign_bits % 2 == 1 {
        v = -v;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn ry_pi_flips_zero_to_one() {
        let mut s = StateVector::basis(1, 0).unwrap();
        s.ry(0, std::f64::consts::PI);
        assert!(close(s.amplitudes()[0], Complex64::new(0.0, 0.0)));
        assert!((s.amplitudes()[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cnot_uses_msb_first_ordering() {
        // |10⟩ (qubit 0 set) → |11⟩.
        let mut s = StateVector::basis(2, 0b10).unwrap();
        s.cnot(0, 1);
        assert_eq!(s.amplitudes()[0b11], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn pauli_y_action() {
        let mut s = StateVector::basis(1, 0).unwrap();
        s.apply_pauli(&"Y".parse().unwrap(), 0);
        assert!(close(s.amplitudes()[1], Complex64::new(0.0, 1.0)));
        let mut s = StateVector::basis(1, 1).unwrap();
        s.apply_pauli(&"Y".parse().unwrap(), 0);
        assert!(close(s.amplitudes()[0], Complex64::new(0.0, -1.0)));
    }

    #[test]
    fn s_dagger_then_hadamard_measures_y() {
        // Eigenstate (|0⟩ + i|1⟩)/√2 of Y maps to |0⟩.
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut s = StateVector::from_amplitudes(vec![Complex64::new(r, 0.0), Complex64::new(0.0, r)]).unwrap();
        s.s_dagger(0);
        s.hadamard(0);
        assert!((s.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
    }
}
