//! Global state reconstruction and classical solution extraction.

use std::collections::HashSet;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{AnsatzSpec, StateVector};
use crate::error::{dim, invalid, DvqaError, Result};
use crate::pauli::{Bitstring, Hamiltonian, Partition};
use crate::tensor::CorrelationTensor;

/// Largest register `reconstruct_state` will build.
pub const MAX_RECONSTRUCT_QUBITS: usize = 20;

#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// Unit-norm global state.
    pub state: StateVector,
    /// Norm before renormalization.
    pub norm: f64,
}

/// Circuit depth implied by the per-subsystem parameter vectors.
pub fn infer_depth(part: &Partition, theta: &[Vec<f64>]) -> Result<usize> {
    if theta.len() != part.num_subsystems() {
        return Err(dim(format!(
            "{} parameter vectors for {} subsystems",
            theta.len(),
            part.num_subsystems()
        )));
    }
    let mut depth = None;
    for (k, (t, &d)) in theta.iter().zip(part.sizes()).enumerate() {
        if t.is_empty() || t.len() % d != 0 {
            return Err(dim(format!("subsystem {k}: {} parameters do not fit width {d}", t.len())));
        }
        let dk = t.len() / d - 1;
        match depth {
            None => depth = Some(dk),
            Some(prev) if prev != dk => {
                return Err(dim(format!("subsystem {k} has depth {dk}, expected {prev}")));
            }
            _ => {}
        }
    }
    Ok(depth.unwrap_or(0))
}

fn check_tensor(part: &Partition, c: &CorrelationTensor) -> Result<()> {
    if c.ranks() != part.ranks() {
        return Err(dim(format!("tensor ranks {:?} differ from partition ranks {:?}", c.ranks(), part.ranks())));
    }
    Ok(())
}

/// `U_k(θ_k)|α⟩` for every `α < R_k` of every subsystem.
fn local_states(part: &Partition, theta: &[Vec<f64>], depth: usize) -> Result<Vec<Vec<StateVector>>> {
    part.sizes()
        .iter()
        .zip(part.ranks())
        .zip(theta)
        .map(|((&d, &r), t)| {
            let spec = AnsatzSpec::new(d, depth);
            (0..r).map(|a| spec.apply(t, &spec.prepare_basis(a)?)).collect()
        })
        .collect()
}

/// `|φ⟩ = Σ_α C*_α ⊗_k U_k(θ_k)|α_k⟩`, subsystem 0 on the most significant
/// qubits.
pub fn reconstruct_state(part: &Partition, theta: &[Vec<f64>], c: &CorrelationTensor) -> Result<Reconstruction> {
    let n = part.total_qubits();
    if n > MAX_RECONSTRUCT_QUBITS {
        return Err(DvqaError::TooLarge(format!(
            "reconstruction of {n} qubits exceeds {MAX_RECONSTRUCT_QUBITS}"
        )));
    }
    check_tensor(part, c)?;
    let depth = infer_depth(part, theta)?;
    let locals = local_states(part, theta, depth)?;
    let mut cur: Vec<Complex64> = c.dense_amplitudes()?.iter().map(|z| z.conj()).collect();
    let ranks = part.ranks();
    let mut prefix = 1usize;
    for (k, states) in locals.iter().enumerate() {
        let r = ranks[k];
        let dk = 1usize << part.sizes()[k];
        let rest: usize = ranks[k + 1..].iter().product();
        let mut next = vec![Complex64::new(0.0, 0.0); prefix * dk * rest];
        for p in 0..prefix {
            for (a, s) in states.iter().enumerate() {
                let src = &cur[(p * r + a) * rest..(p * r + a + 1) * rest];
                for (x, &sx) in s.amplitudes().iter().enumerate() {
                    if sx == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let dst = &mut next[(p * dk + x) * rest..(p * dk + x + 1) * rest];
                    for (d, &v) in dst.iter_mut().zip(src) {
                        *d += sx * v;
                    }
                }
            }
        }
        cur = next;
        prefix *= dk;
    }
    let norm = cur.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(DvqaError::Numerical("reconstructed state has zero norm".into()));
    }
    cur.iter_mut().for_each(|z| *z /= norm);
    Ok(Reconstruction {
        state: StateVector::from_amplitudes(cur)?,
        norm,
    })
}

/// Draw `samples` bitstrings: `α ~ |C_α|²`, then `x_k ~ |⟨x_k|U_k|α_k⟩|²`
/// per subsystem. Each sample is returned with its classical energy.
pub fn sample_solutions(
    h: &Hamiltonian,
    part: &Partition,
    theta: &[Vec<f64>],
    c: &CorrelationTensor,
    samples: usize,
    seed: u64,
) -> Result<Vec<(Bitstring, f64)>> {
    if samples == 0 {
        return Err(invalid("samples must be at least 1"));
    }
    if h.num_qubits() != part.total_qubits() {
        return Err(dim("partition does not cover the Hamiltonian"));
    }
    check_tensor(part, c)?;
    let diag = h.diagonal()?;
    let depth = infer_depth(part, theta)?;
    let dists = local_states(part, theta, depth)?
        .into_iter()
        .map(|states| {
            states
                .iter()
                .map(|s| {
                    WeightedIndex::new(s.probabilities())
                        .map_err(|e| DvqaError::Numerical(format!("local distribution: {e}")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let sampler = c.sampler()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let alpha = sampler.sample(&mut rng);
        let mut bits = Vec::with_capacity(h.num_qubits());
        for ((&d, k_dists), &a) in part.sizes().iter().zip(&dists).zip(&alpha) {
            let x = k_dists[a].sample(&mut rng);
            bits.extend((0..d).map(|j| (x >> (d - 1 - j)) & 1 == 1));
        }
        let e = diag.energy(&bits);
        out.push((Bitstring::new(bits), e));
    }
    Ok(out)
}

/// Best sampled bitstring by classical energy; the first one drawn wins ties.
pub fn extract_solution(
    h: &Hamiltonian,
    part: &Partition,
    theta: &[Vec<f64>],
    c: &CorrelationTensor,
    samples: usize,
    seed: u64,
) -> Result<(Bitstring, f64)> {
    let drawn = sample_solutions(h, part, theta, c, samples, seed)?;
    let mut seen = HashSet::new();
    let mut best: Option<(Bitstring, f64)> = None;
    for (bits, e) in drawn {
        if !seen.insert(bits.clone()) {
            continue;
        }
        if best.as_ref().is_none_or(|(_, be)| e < *be) {
            best = Some((bits, e));
        }
    }
    Ok(best.expect("at least one sample"))
}
