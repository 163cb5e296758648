use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, DvqaError, Result};
use crate::pauli::{Bitstring, Hamiltonian};

pub const MAX_BRUTE_FORCE_QUBITS: usize = 24;

/// Exhaustive minimum of the classical energy; ties go to the lowest
/// bitstring value.
pub fn brute_force(h: &Hamiltonian) -> Result<(Bitstring, f64)> {
    let n = h.num_qubits();
    if n > MAX_BRUTE_FORCE_QUBITS {
        return Err(DvqaError::TooLarge(format!(
            "brute force over {n} qubits exceeds {MAX_BRUTE_FORCE_QUBITS}"
        )));
    }
    if !h.is_diagonal() {
        return Err(DvqaError::NotDiagonal);
    }
    // Qubit q is bit n−1−q of the index, so a Z-support becomes a bit mask.
    let masks: Vec<(u32, f64)> = h
        .terms()
        .iter()
        .map(|t| {
            let mask = t.string.z_positions().iter().fold(0u32, |m, &q| m | 1 << (n - 1 - q));
            (mask, t.weight)
        })
        .collect();
    let offset = h.offset();
    let energy = |x: u32| -> f64 {
        offset
            + masks
                .iter()
                .map(|&(m, w)| if (x & m).count_ones().is_multiple_of(2) { w } else { -w })
                .sum::<f64>()
    };
    let total = 1u64 << n;
    let chunk = 1u64 << n.min(12);
    let (idx, e) = (0..total / chunk)
        .into_par_iter()
        .map(|c| {
            let mut best = (c * chunk, f64::INFINITY);
            for x in c * chunk..(c + 1) * chunk {
                let e = energy(x as u32);
                if e < best.1 {
                    best = (x, e);
                }
            }
            best
        })
        .reduce(
            || (u64::MAX, f64::INFINITY),
            |a, b| if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a },
        );
    Ok((Bitstring::from_index(idx, n), e))
}

/// Geometric temperature schedule over the sweep budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaSchedule {
    pub t_initial: f64,
    pub t_final: f64,
}

impl SaSchedule {
    /// From `max|w|` down to `0.01·min nonzero |w|`.
    pub fn for_hamiltonian(h: &Hamiltonian) -> Self {
        let mags = h.terms().iter().map(|t| t.weight.abs()).filter(|&w| w > 0.0);
        let max = mags.clone().fold(0.0, f64::max);
        let min = mags.fold(f64::INFINITY, f64::min);
        if max == 0.0 {
            return SaSchedule {
                t_initial: 1.0,
                t_final: 1.0,
            };
        }
        SaSchedule {
            t_initial: max,
            t_final: 0.01 * min,
        }
    }

    fn temperature(&self, sweep: usize, sweeps: usize) -> f64 {
        if sweeps <= 1 {
            return self.t_final;
        }
        let frac = sweep as f64 / (sweeps - 1) as f64;
        self.t_initial * (self.t_final / self.t_initial).powf(frac)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaOutcome {
    pub bitstring: Bitstring,
    pub energy: f64,
    /// Energy of the random starting state.
    pub initial_energy: f64,
}

/// Single-spin-flip Metropolis annealing from a random state, returning the
/// best state ever visited.
pub fn simulated_annealing(
    h: &Hamiltonian,
    sweeps: usize,
    schedule: Option<SaSchedule>,
    seed: u64,
) -> Result<SaOutcome> {
    if sweeps == 0 {
        return Err(invalid("sweeps must be at least 1"));
    }
    let diag = h.diagonal()?;
    let schedule = schedule.unwrap_or_else(|| SaSchedule::for_hamiltonian(h));
    if !(schedule.t_initial > 0.0 && schedule.t_final > 0.0) {
        return Err(invalid("temperatures must be positive"));
    }
    let n = h.num_qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bits: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    let start = bits.clone();
    let initial_energy = diag.energy(&bits);
    let mut e = initial_energy;
    let mut best = bits.clone();
    let mut best_e = e;
    for s in 0..sweeps {
        let t = schedule.temperature(s, sweeps);
        for q in 0..n {
            let delta = diag.flip_delta(&bits, q);
            if delta <= 0.0 || rng.random::<f64>() < (-delta / t).exp() {
                bits[q] = !bits[q];
                e += delta;
                if e < best_e {
                    best_e = e;
                    best.copy_from_slice(&bits);
                }
            }
        }
    }
    let mut energy = diag.energy(&best);
    if energy > initial_energy {
        // Incremental rounding can rank a near-tie below the start.
        best = start;
        energy = initial_energy;
    }
    let bitstring = Bitstring::new(best);
    Ok(SaOutcome {
        bitstring,
        energy,
        initial_energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{maxcut_hamiltonian, random_qubo, Graph};

    #[test]
    fn small_optima() {
        let edge = maxcut_hamiltonian(&Graph::new(2, [(0, 1, 1.0)]).unwrap());
        assert_eq!(brute_force(&edge).unwrap().1, -1.0);
        let tri = maxcut_hamiltonian(&Graph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap());
        assert_eq!(brute_force(&tri).unwrap().1, -2.0);
        let zero = Hamiltonian::new(5, Vec::new(), 0.0).unwrap();
        let (b, e) = brute_force(&zero).unwrap();
        assert_eq!(e, 0.0);
        assert_eq!(b.to_string(), "00000");
    }

    #[test]
    fn single_edge_tie_goes_to_lowest_value() {
        let edge = maxcut_hamiltonian(&Graph::new(2, [(0, 1, 1.0)]).unwrap());
        assert_eq!(brute_force(&edge).unwrap().0.to_string(), "01");
    }

    #[test]
    fn rejects_large_and_offdiagonal() {
        let big = Hamiltonian::new(25, Vec::new(), 0.0).unwrap();
        assert!(matches!(brute_force(&big), Err(DvqaError::TooLarge(_))));
        let x = Hamiltonian::from_strs(1, &[(1.0, "X")], 0.0).unwrap();
        assert!(matches!(brute_force(&x), Err(DvqaError::NotDiagonal)));
    }

    #[test]
    fn annealing_never_ends_above_start() {
        let h = random_qubo(12, 4).unwrap();
        for seed in 0..20 {
            let out = simulated_annealing(&h, 50, None, seed).unwrap();
            assert!(out.energy <= out.initial_energy);
            assert!((out.energy - h.classical_energy(&out.bitstring).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn annealing_zero_hamiltonian() {
        let zero = Hamiltonian::new(4, Vec::new(), 0.0).unwrap();
        assert_eq!(simulated_annealing(&zero, 10, None, 1).unwrap().energy, 0.0);
    }

    #[test]
    fn annealing_is_deterministic() {
        let h = random_qubo(10, 1).unwrap();
        let a = simulated_annealing(&h, 100, None, 77).unwrap();
        let b = simulated_annealing(&h, 100, None, 77).unwrap();
        assert_eq!(a, b);
    }
}
