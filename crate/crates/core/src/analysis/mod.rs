//! Noise bounds, complexity formulas, classical baselines and the
//! benchmark studies.

mod baseline;
mod study;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::pauli::{Hamiltonian, Partition};

pub use baseline::{brute_force, simulated_annealing, SaOutcome, SaSchedule, MAX_BRUTE_FORCE_QUBITS};
pub use study::{
    bench_csv, bench_instance, loglog_slope, mean_std, median, quantile, parse_kv, reference_optimum, run_bench, run_noise_study, run_scaling_study, scaling_instance,
    BenchRecord, NoiseConfig, NoiseHamiltonian, NoiseRow, NoiseRun, NoiseStudy, ScalingConfig, ScalingRow,
    ScalingStudy, BENCH_HEADER, NOISE_HEADER, NOISE_RUNS_HEADER, SCALING_HEADER,
};

/// Inputs of the depolarizing-noise deviation bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBoundInput {
    pub p1: f64,
    pub p2: f64,
    /// Ansatz depth `D_l`.
    pub depth: usize,
    /// Subsystem width `d`.
    pub width: usize,
    pub r_max: usize,
    /// Hamiltonian locality `p`.
    pub locality: usize,
    /// Reference expectation `Tr[Hρ]`.
    pub e_ref: f64,
    pub c_b: f64,
    pub eps_c: f64,
}

impl NoiseBoundInput {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if self.depth == 0 || self.width == 0 || self.r_max == 0 || self.locality == 0 {
            return Err(invalid("depth, width, r_max and locality must be positive"));
        }
        if !self.e_ref.is_finite() || !self.c_b.is_finite() || !self.eps_c.is_finite() {
            return Err(invalid("e_ref, c_b and eps_c must be finite"));
        }
        Ok(())
    }
}

/// `(1−p1)^(4 + D_l·d) · (1−p2)^(log2 R_max + D_l·(d−1))`.
pub fn f_sub(inp: &NoiseBoundInput) -> f64 {
    let d = inp.width as f64;
    let dl = inp.depth as f64;
    let e1 = 4.0 + dl * d;
    let e2 = (inp.r_max as f64).log2() + dl * (d - 1.0);
    (1.0 - inp.p1).powf(e1) * (1.0 - inp.p2).powf(e2)
}

/// `(1 − f_sub^p)·|E_ref|`.
pub fn bound_iid(inp: &NoiseBoundInput) -> f64 {
    (1.0 - f_sub(inp).powi(inp.locality as i32)) * inp.e_ref.abs()
}

/// `f_sub^(p−1)·p·C_B·D_l·ε_c`.
pub fn bound_noniid(inp: &NoiseBoundInput) -> f64 {
    let p = inp.locality as i32;
    f_sub(inp).powi(p - 1) * p as f64 * inp.c_b * inp.depth as f64 * inp.eps_c
}

pub fn bound_total(inp: &NoiseBoundInput) -> f64 {
    bound_iid(inp) + bound_noniid(inp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotPlan {
    pub w_l1: f64,
    pub c_l1: f64,
    pub epsilon: f64,
    pub shots: u64,
}

impl ShotPlan {
    pub fn new(w_l1: f64, c_l1: f64, epsilon: f64) -> Result<Self> {
        Ok(ShotPlan {
            w_l1,
            c_l1,
            epsilon,
            shots: shot_budget(w_l1, c_l1, epsilon)?,
        })
    }
}

/// `⌈‖w‖₁²·‖C‖₁⁴/ε²⌉`, at least 1.
pub fn shot_budget(w_l1: f64, c_l1: f64, epsilon: f64) -> Result<u64> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(invalid("epsilon must be positive"));
    }
    if !(w_l1 >= 0.0) || !(c_l1 >= 0.0) {
        return Err(invalid("norms must be non-negative"));
    }
    let raw = (w_l1 * w_l1 * c_l1.powi(4)) / (epsilon * epsilon);
    // Snap values within rounding of an integer before the ceiling.
    let snapped = if (raw - raw.round()).abs() <= 1e-9 * raw.max(1.0) {
        raw.round()
    } else {
        raw.ceil()
    };
    if !(snapped < u64::MAX as f64) {
        return Err(invalid("shot budget overflows"));
    }
    Ok((snapped as u64).max(1))
}

/// `OPT/A` for minimization problems whose values are both negative.
pub fn approximation_ratio(opt: f64, achieved: f64) -> Result<f64> {
    if !(opt < 0.0 && achieved < 0.0) {
        return Err(invalid(format!(
            "approximation ratio assumes negative OPT and achieved values (got OPT = {opt}, A = {achieved})"
        )));
    }
    Ok(opt / achieved)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    /// `Σ_i Σ_{k active in i} 2·R_k²`: every `(k, i, α, β, re/im)` circuit.
    pub circuit_variants: u64,
    /// Circuits after sharing identical local factors within a subsystem;
    /// this is what one loss evaluation in shot mode executes.
    pub distinct_circuit_variants: u64,
    /// `M·R_max^(4p)`.
    pub circuit_formula: f64,
    /// `K·R_max·M·m³ + p·R_max²·M·m²`.
    pub contraction_cost: f64,
}

pub fn resource_estimate(h: &Hamiltonian, part: &Partition, bond: usize) -> Result<ResourceEstimate> {
    if bond == 0 {
        return Err(invalid("bond dimension must be at least 1"));
    }
    let split = h.partition_terms(part)?;
    let ranks = part.ranks();
    let mut circuit_variants = 0u64;
    let mut seen = std::collections::HashSet::new();
    let mut distinct = 0u64;
    for t in &split {
        for k in t.active_subsystems() {
            let c = 2 * (ranks[k] * ranks[k]) as u64;
            circuit_variants += c;
            if seen.insert((k, t.factors[k].clone())) {
                distinct += c;
            }
        }
    }
    let m = h.num_terms() as f64;
    let r = part.max_rank() as f64;
    let p = h.locality() as f64;
    let kk = part.num_subsystems() as f64;
    let b = bond as f64;
    Ok(ResourceEstimate {
        circuit_variants,
        distinct_circuit_variants: distinct,
        circuit_formula: m * r.powf(4.0 * p),
        contraction_cost: kk * r * m * b.powi(3) + p * r * r * m * b * b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input() -> NoiseBoundInput {
        NoiseBoundInput {
            p1: 0.01,
            p2: 0.2,
            depth: 6,
            width: 5,
            r_max: 1,
            locality: 2,
            e_ref: -3.0,
            c_b: 1.0,
            eps_c: 0.0,
        }
    }

    #[test]
    fn noiseless_fidelity_is_one() {
        let inp = NoiseBoundInput {
            p1: 0.0,
            p2: 0.0,
            ..input()
        };
        assert_eq!(f_sub(&inp), 1.0);
        assert_eq!(bound_iid(&inp), 0.0);
    }

    #[test]
    fn printed_setting() {
        let want = 0.99f64.powi(34) * 0.8f64.powi(24);
        assert!((f_sub(&input()) - want).abs() < 1e-15);
    }

    #[test]
    fn shrinks_with_width() {
        let mut prev = 1.0;
        for d in 1..10 {
            let f = f_sub(&NoiseBoundInput { width: d, ..input() });
            assert!(f < prev && f > 0.0);
            prev = f;
        }
    }

    #[test]
    fn shot_budget_arithmetic() {
        assert_eq!(shot_budget(1.0, 1.0, 0.1).unwrap(), 100);
        assert_eq!(shot_budget(1.0, 1.0, 0.05).unwrap(), 400);
        assert_eq!(shot_budget(2.0, 3.0, 1.0).unwrap(), 324);
        assert!(shot_budget(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn ratio_requires_negative_values() {
        assert_eq!(approximation_ratio(-2.0, -2.0).unwrap(), 1.0);
        assert!((approximation_ratio(-2.0, -1.6).unwrap() - 1.25).abs() < 1e-15);
        let err = approximation_ratio(2.0, -1.0).unwrap_err().to_string();
        assert!(err.contains("negative"));
        assert!(approximation_ratio(-1.0, 0.0).is_err());
    }
}
