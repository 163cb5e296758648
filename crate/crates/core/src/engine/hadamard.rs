//! Ancilla-interference (Hadamard-test) estimation of transition elements.
//!
//! Circuit on `1 + d` qubits, ancilla first:
//!
//! ```text
//! anc : |0⟩ ─ H ─●─────────── measure X (real) or Y (imag)
//! sys : |α⟩ ─────W── U(θ) ─── measure P
//! ```
//!
//! `W` is the X-string on the bits where `α` and `β` differ, so the register
//! ends in `(|0⟩U|α⟩ + |1⟩U|β⟩)/√2`. Then `⟨X⊗P⟩ = Re⟨α|U†PU|β⟩` and
//! `⟨Y⊗P⟩ = Im⟨α|U†PU|β⟩`, which give `Re Π = ⟨X⊗P⟩`, `Im Π = −⟨Y⊗P⟩`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use super::{stream_seed, AnsatzSpec, StateVector};
use crate::error::{dim, invalid, Result};
use crate::pauli::{PauliOp, PauliString};

#[derive(Clone, Copy)]
enum Branch {
    Real,
    Imag,
}

/// Register state right before the measurement-basis change.
fn interference_state(
    spec: &AnsatzSpec,
    theta: &[f64],
    alpha: usize,
    beta: usize,
) -> Result<StateVector> {
    let d = spec.num_qubits;
    let size = 1usize << d;
    if alpha >= size || beta >= size {
        return Err(dim(format!("basis indices ({alpha}, {beta}) out of range for {d} qubits")));
    }
    let mut s = StateVector::basis(d + 1, alpha)?;
    s.hadamard(0);
    let diff = alpha ^ beta;
    for q in 0..d {
        if (diff >> (d - 1 - q)) & 1 == 1 {
            s.cnot(0, 1 + q);
        }
    }
    spec.apply_at(theta, &mut s, 1)?;
    Ok(s)
}

/// Probability that the measured parity of `anc ⊗ P` is `+1`, after rotating
/// every measured qubit into its Pauli eigenbasis.
fn plus_probability(mut s: StateVector, p: &PauliString, branch: Branch) -> f64 {
    let n = s.num_qubits();
    match branch {
        Branch::Real => s.hadamard(0),
        Branch::Imag => {
            s.s_dagger(0);
            s.hadamard(0);
        }
    }
    let mut support = 1usize << (n - 1);
    for (j, &op) in p.ops().iter().enumerate() {
        let q = 1 + j;
        match op {
            PauliOp::I => continue,
            PauliOp::X => s.hadamard(q),
            PauliOp::Y => {
                s.s_dagger(q);
                s.hadamard(q);
            }
            PauliOp::Z => {}
        }
        support |= 1 << (n - 1 - q);
    }
    let even: f64 = s
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| (i & support).count_ones().is_multiple_of(2))
        .map(|(_, a)| a.norm_sqr())
        .sum();
    even.clamp(0.0, 1.0)
}

/// Exact `(⟨X⊗P⟩, ⟨Y⊗P⟩)` of the interference circuit.
pub fn hadamard_expectations(
    spec: &AnsatzSpec,
    theta: &[f64],
    p: &PauliString,
    alpha: usize,
    beta: usize,
) -> Result<(f64, f64)> {
    if p.len() != spec.num_qubits {
        return Err(dim("factor length does not match subsystem width"));
    }
    let s = interference_state(spec, theta, alpha, beta)?;
    let re = 2.0 * plus_probability(s.clone(), p, Branch::Real) - 1.0;
    let im = 2.0 * plus_probability(s, p, Branch::Imag) - 1.0;
    Ok((re, im))
}

/// Shot-sampled estimate of `Π[α][β] = ⟨β|U†PU|α⟩`.
///
/// Each branch runs `shots` circuits; the ±1 parity outcomes are
/// binomially distributed with the rotated-basis probability of `+1`.
/// Identity factors short-circuit to `δ_αβ`.
pub fn pi_hadamard_estimate(
    spec: &AnsatzSpec,
    theta: &[f64],
    p: &PauliString,
    alpha: usize,
    beta: usize,
    shots: u64,
    seed: u64,
) -> Result<Complex64> {
    if shots == 0 {
        return Err(invalid("shots must be at least 1"));
    }
    if p.len() != spec.num_qubits {
        return Err(dim("factor length does not match subsystem width"));
    }
    if p.is_identity() {
        let size = 1usize << spec.num_qubits;
        if alpha >= size || beta >= size {
            return Err(dim("basis index out of range"));
        }
        return Ok(Complex64::new(if alpha == beta { 1.0 } else { 0.0 }, 0.0));
    }
    let s = interference_state(spec, theta, alpha, beta)?;
    let sample = |branch: Branch, stream: u64| -> f64 {
        let prob = plus_probability(s.clone(), p, branch);
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(&[seed, stream]));
        let plus = Binomial::new(shots, prob)
            .expect("probability clamped to [0, 1]")
            .sample(&mut rng);
        (2.0 * plus as f64 - shots as f64) / shots as f64
    };
    let x = sample(Branch::Real, 0);
    let y = sample(Branch::Imag, 1);
    Ok(Complex64::new(x, -y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::pi_exact;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    #[test]
    fn exact_branches_reproduce_transition_element() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let spec = AnsatzSpec::new(3, 2);
        for p in ["ZII", "XYZ", "IYI", "ZZX"] {
            let p: PauliString = p.parse().unwrap();
            let theta: Vec<f64> = (0..spec.num_params()).map(|_| rng.random_range(-PI..PI)).collect();
            for (a, b) in [(0, 0), (0, 3), (5, 2), (7, 6)] {
                let (x, y) = hadamard_expectations(&spec, &theta, &p, a, b).unwrap();
                let want = pi_exact(&spec, &theta, &p, a, b).unwrap();
                assert!((x - want.re).abs() < 1e-12, "{p} ({a},{b})");
                assert!((-y - want.im).abs() < 1e-12, "{p} ({a},{b})");
            }
        }
    }

    #[test]
    fn identity_is_short_circuited() {
        let spec = AnsatzSpec::new(2, 1);
        let id: PauliString = "II".parse().unwrap();
        let v = pi_hadamard_estimate(&spec, &[0.3; 4], &id, 2, 2, 1, 9).unwrap();
        assert_eq!(v.re, 1.0);
        let v = pi_hadamard_estimate(&spec, &[0.3; 4], &id, 1, 2, 1, 9).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn zero_shots_rejected() {
        let spec = AnsatzSpec::new(1, 0);
        assert!(pi_hadamard_estimate(&spec, &[0.1], &"Z".parse().unwrap(), 0, 0, 0, 1).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = AnsatzSpec::new(2, 1);
        let p: PauliString = "ZX".parse().unwrap();
        let theta = [0.1, 0.7, -0.4, 1.3];
        let a = pi_hadamard_estimate(&spec, &theta, &p, 0, 3, 500, 42).unwrap();
        let b = pi_hadamard_estimate(&spec, &theta, &p, 0, 3, 500, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn converges_at_a_million_shots() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let spec = AnsatzSpec::new(2, 2);
        let shots = 1_000_000u64;
        for (p, a, b) in [("ZZ", 1, 2), ("YX", 0, 3), ("ZI", 0, 0)] {
            let p: PauliString = p.parse().unwrap();
            let theta: Vec<f64> = (0..spec.num_params()).map(|_| rng.random_range(-PI..PI)).collect();
            let est = pi_hadamard_estimate(&spec, &theta, &p, a, b, shots, 3).unwrap();
            let exact = pi_exact(&spec, &theta, &p, a, b).unwrap();
            let err = (est - exact).norm();
            assert!(err < 5.0 / (shots as f64).sqrt(), "err {err}");
            assert!(err < 5e-3);
        }
    }
}
