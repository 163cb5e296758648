//! Joint optimization of the subsystem circuits `θ` and the correlation
//! tensor `C`.

mod adam;
mod gradcheck;
mod state;

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::engine::{evaluate_subsystem, stream_seed, AnsatzSpec, CircuitCounter, EvalMode, PiTensor};
use crate::error::{dim, invalid, DvqaError, Result};
use crate::pauli::{Bitstring, Hamiltonian, Partition, PauliString};
use crate::tensor::{Contraction, CorrelationTensor, Layout, LocalOp, OperatorTerm};

pub use adam::{adam_step, AdamState};
pub use gradcheck::{finite_difference_check, GradCheck};
pub use state::{
    extract_solution, infer_depth, reconstruct_state, sample_solutions, Reconstruction, MAX_RECONSTRUCT_QUBITS,
};

/// Which parameter groups move in each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum UpdateSchedule {
    /// `θ` and `C` from the same gradient evaluation.
    #[default]
    Simultaneous,
    /// `θ` on even iterations, `C` on odd ones.
    Alternating,
    /// `θ` frozen at its initial value.
    TensorOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub depth: usize,
    pub mode: EvalMode,
    pub seed: u64,
    pub restarts: usize,
    /// `None` picks dense or train from the tensor size.
    pub layout: Option<Layout>,
    /// Bond dimension used when the layout is chosen automatically.
    pub bond: usize,
    /// Keep `C` real.
    pub real_c: bool,
    pub schedule: UpdateSchedule,
    /// Bitstrings drawn when extracting the solution.
    pub samples: usize,
    /// Wall-clock budget for the whole call, in seconds.
    pub time_budget: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: 200,
            learning_rate: 0.05,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            depth: 6,
            mode: EvalMode::Exact,
            seed: 0,
            restarts: 1,
            layout: None,
            bond: 8,
            real_c: false,
            schedule: UpdateSchedule::Simultaneous,
            samples: 256,
            time_budget: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(invalid("iterations must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid("learning rate must be positive"));
        }
        for (name, b) in [("beta1", self.adam_beta1), ("beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(invalid(format!("adam {name} must lie in [0, 1)")));
            }
        }
        if !(self.adam_eps > 0.0) {
            return Err(invalid("adam eps must be positive"));
        }
        if self.restarts == 0 {
            return Err(invalid("restarts must be at least 1"));
        }
        if self.samples == 0 {
            return Err(invalid("samples must be at least 1"));
        }
        if self.bond == 0 || matches!(self.layout, Some(Layout::Train { bond: 0 })) {
            return Err(invalid("bond dimension must be at least 1"));
        }
        if let Some(t) = self.time_budget {
            if !(t > 0.0) {
                return Err(invalid("time budget must be positive"));
            }
        }
        self.mode.validate()
    }

    fn layout_for(&self, ranks: &[usize]) -> Layout {
        self.layout.unwrap_or_else(|| Layout::auto(ranks, self.bond))
    }
}

/// Hamiltonian split over a partition, with the distinct local factors of
/// every subsystem collected once.
#[derive(Debug, Clone)]
pub struct Objective {
    part: Partition,
    offset: f64,
    specs: Vec<AnsatzSpec>,
    /// Distinct non-identity factors per subsystem.
    factors: Vec<Vec<PauliString>>,
    /// Weight and `(subsystem, factor index)` legs of every term.
    terms: Vec<(f64, Vec<(usize, usize)>)>,
}

/// Loss and both gradients at one point.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub loss: Contraction,
    pub grad_theta: Vec<Vec<f64>>,
    /// Tangent (norm-preserving) gradient of `C`.
    pub grad_c: Vec<Complex64>,
    pub lambda: f64,
}

impl Objective {
    pub fn new(h: &Hamiltonian, part: &Partition, depth: usize) -> Result<Self> {
        let split = h.partition_terms(part)?;
        let kk = part.num_subsystems();
        let mut factors: Vec<Vec<PauliString>> = vec![Vec::new(); kk];
        let mut terms = Vec::with_capacity(split.len());
        for t in &split {
            let legs = t
                .active_subsystems()
                .map(|k| {
                    let f = &t.factors[k];
                    let idx = match factors[k].iter().position(|g| g == f) {
                        Some(i) => i,
                        None => {
                            factors[k].push(f.clone());
                            factors[k].len() - 1
                        }
                    };
                    (k, idx)
                })
                .collect();
            terms.push((t.weight, legs));
        }
        Ok(Objective {
            part: part.clone(),
            offset: h.offset(),
            specs: part.sizes().iter().map(|&d| AnsatzSpec::new(d, depth)).collect(),
            factors,
            terms,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.part
    }

    pub fn depth(&self) -> usize {
        self.specs.first().map_or(0, |s| s.depth)
    }

    pub fn specs(&self) -> &[AnsatzSpec] {
        &self.specs
    }

    pub fn factors(&self) -> &[Vec<PauliString>] {
        &self.factors
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn check(&self, theta: &[Vec<f64>], c: &CorrelationTensor) -> Result<()> {
        if theta.len() != self.specs.len() {
            return Err(dim(format!(
                "{} parameter vectors for {} subsystems",
                theta.len(),
                self.specs.len()
            )));
        }
        for (spec, t) in self.specs.iter().zip(theta) {
            spec.check_params(t)?;
        }
        if c.ranks() != self.part.ranks() {
            return Err(dim(format!(
                "tensor ranks {:?} differ from partition ranks {:?}",
                c.ranks(),
                self.part.ranks()
            )));
        }
        Ok(())
    }

    /// All distinct Π tensors at `θ`, evaluated in parallel per subsystem.
    pub fn pi_tensors(
        &self,
        theta: &[Vec<f64>],
        mode: &EvalMode,
        seed: u64,
        counter: Option<&CircuitCounter>,
    ) -> Result<Vec<Vec<PiTensor>>> {
        let ranks = self.part.ranks();
        (0..self.specs.len())
            .into_par_iter()
            .map(|k| evaluate_subsystem(&self.specs[k], &theta[k], ranks[k], &self.factors[k], mode, seed, k, counter))
            .collect()
    }

    fn operator_terms<'a>(&self, pis: &'a [Vec<PiTensor>]) -> Vec<OperatorTerm<'a>> {
        self.terms
            .iter()
            .map(|(w, legs)| OperatorTerm {
                weight: *w,
                legs: legs
                    .iter()
                    .map(|&(k, f)| LocalOp {
                        subsystem: k,
                        matrix: pis[k][f].operator(),
                    })
                    .collect(),
            })
            .collect()
    }

    pub fn loss(&self, theta: &[Vec<f64>], c: &CorrelationTensor, mode: &EvalMode, seed: u64) -> Result<Contraction> {
        self.loss_counted(theta, c, mode, seed, None)
    }

    pub fn loss_counted(
        &self,
        theta: &[Vec<f64>],
        c: &CorrelationTensor,
        mode: &EvalMode,
        seed: u64,
        counter: Option<&CircuitCounter>,
    ) -> Result<Contraction> {
        self.check(theta, c)?;
        let pis = self.pi_tensors(theta, mode, seed, counter)?;
        c.contract_objective(&self.operator_terms(&pis), self.offset)
    }

    pub fn grad_theta(
        &self,
        theta: &[Vec<f64>],
        c: &CorrelationTensor,
        mode: &EvalMode,
        seed: u64,
    ) -> Result<Vec<Vec<f64>>> {
        self.check(theta, c)?;
        let pis = self.pi_tensors(theta, mode, seed, None)?;
        self.theta_gradient(theta, c, mode, seed, &self.operator_terms(&pis), None)
    }

    /// Tangent gradient of `C` and the multiplier `λ`.
    pub fn grad_c(
        &self,
        theta: &[Vec<f64>],
        c: &CorrelationTensor,
        mode: &EvalMode,
        seed: u64,
    ) -> Result<(Vec<Complex64>, f64)> {
        self.check(theta, c)?;
        let pis = self.pi_tensors(theta, mode, seed, None)?;
        let g = c.objective_gradient(&self.operator_terms(&pis))?;
        Ok(c.project_gradient(&g))
    }

    /// Loss and both gradients from one set of Π evaluations.
    pub fn evaluate(
        &self,
        theta: &[Vec<f64>],
        c: &CorrelationTensor,
        mode: &EvalMode,
        seed: u64,
        counter: Option<&CircuitCounter>,
    ) -> Result<Evaluation> {
        self.check(theta, c)?;
        let pis = self.pi_tensors(theta, mode, seed, counter)?;
        let terms = self.operator_terms(&pis);
        let loss = c.contract_objective(&terms, self.offset)?;
        let g = c.objective_gradient(&terms)?;
        let (grad_c, lambda) = c.project_gradient(&g);
        let grad_theta = self.theta_gradient(theta, c, mode, seed, &terms, counter)?;
        Ok(Evaluation {
            loss,
            grad_theta,
            grad_c,
            lambda,
        })
    }

    /// `∂ℓ/∂θ_{k,t} = Σ_f Re Σ E_{k,f} ⊙ ∂A_{k,f}/∂θ_t`, where `E_{k,f}`
    /// collects the weighted environments of every term using factor `f`
    /// on subsystem `k`, and `∂A` comes from the parameter-shift rule.
    fn theta_gradient(
        &self,
        theta: &[Vec<f64>],
        c: &CorrelationTensor,
        mode: &EvalMode,
        seed: u64,
        terms: &[OperatorTerm<'_>],
        counter: Option<&CircuitCounter>,
    ) -> Result<Vec<Vec<f64>>> {
        let ranks = self.part.ranks();
        let envs = terms
            .par_iter()
            .map(|t| {
                t.legs
                    .iter()
                    .map(|l| c.environment(&t.legs, l.subsystem))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut acc: Vec<Vec<Vec<Complex64>>> = self
            .factors
            .iter()
            .zip(ranks)
            .map(|(fs, &r)| vec![vec![Complex64::new(0.0, 0.0); r * r]; fs.len()])
            .collect();
        for ((w, legs), term_envs) in self.terms.iter().zip(envs) {
            for (&(k, f), e) in legs.iter().zip(term_envs) {
                for (a, v) in acc[k][f].iter_mut().zip(e) {
                    *a += v * *w;
                }
            }
        }
        let tasks: Vec<(usize, usize)> = self
            .specs
            .iter()
            .enumerate()
            .filter(|(k, _)| !self.factors[*k].is_empty())
            .flat_map(|(k, s)| (0..s.num_params()).map(move |t| (k, t)))
            .collect();
        let values = tasks
            .par_iter()
            .map(|&(k, t)| {
                let shifted = |delta: f64| {
                    let mut th = theta[k].clone();
                    th[t] += delta;
                    evaluate_subsystem(&self.specs[k], &th, ranks[k], &self.factors[k], mode, seed, k, counter)
                };
                let plus = shifted(FRAC_PI_2)?;
                let minus = shifted(-FRAC_PI_2)?;
                let mut g = 0.0;
                for ((env, p), m) in acc[k].iter().zip(&plus).zip(&minus) {
                    for ((e, x), y) in env.iter().zip(p.operator()).zip(m.operator()) {
                        g += (e * (x - y)).re;
                    }
                }
                Ok(0.5 * g)
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut out: Vec<Vec<f64>> = self.specs.iter().map(|s| vec![0.0; s.num_params()]).collect();
        for (&(k, t), v) in tasks.iter().zip(values) {
            out[k][t] = v;
        }
        Ok(out)
    }
}

/// One row of the per-iteration log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub loss: f64,
    pub loss_imag: f64,
    pub grad_theta_norm: f64,
    pub grad_c_norm: f64,
    pub c_norm_sqr: f64,
}

pub const RECORDS_HEADER: &str = "iteration,loss,loss_imag,grad_theta_norm,grad_c_norm,c_norm_sqr";

pub fn records_csv(records: &[IterationRecord]) -> String {
    let mut out = String::from(RECORDS_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.iteration, r.loss, r.loss_imag, r.grad_theta_norm, r.grad_c_norm, r.c_norm_sqr
        );
    }
    out
}

/// Outcome of a single training run from given initial values.
#[derive(Debug, Clone)]
pub struct TrainRun {
    pub theta: Vec<Vec<f64>>,
    pub c: CorrelationTensor,
    pub records: Vec<IterationRecord>,
    pub timed_out: bool,
    pub circuits: u64,
}

impl TrainRun {
    pub fn loss_trace(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.loss).collect()
    }
}

fn display<S: Serializer>(b: &Bitstring, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(b)
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainResult {
    pub theta_star: Vec<Vec<f64>>,
    pub c_star: CorrelationTensor,
    /// Loss before the first update and after every update.
    pub loss_trace: Vec<f64>,
    #[serde(serialize_with = "display")]
    pub best_bitstring: Bitstring,
    pub best_energy: f64,
    /// Seconds.
    pub wall_time: f64,
    pub best_restart: usize,
    pub restart_energies: Vec<f64>,
    pub records: Vec<IterationRecord>,
    /// Simulated Hadamard-test circuits (shot mode only).
    pub circuits: u64,
    pub timed_out: bool,
}

impl TrainResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("train result serializes")
    }

    pub fn final_loss(&self) -> f64 {
        *self.loss_trace.last().expect("non-empty trace")
    }
}

/// Uniform in `[−π, π)` per parameter.
pub fn init_theta(obj: &Objective, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    obj.specs
        .iter()
        .map(|s| (0..s.num_params()).map(|_| rng.random_range(-PI..PI)).collect())
        .collect()
}

fn flat_norm(v: &[Vec<f64>]) -> f64 {
    v.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

fn split_complex(z: &[Complex64]) -> Vec<f64> {
    z.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Largest tolerated `|‖C‖² − 1|` during training.
pub const NORM_TOL: f64 = 1e-8;
/// Largest tolerated `|Im ℓ|` during exact-mode training.
pub const IMAG_TOL: f64 = 1e-9;

/// Run one training from explicit initial values.
///
/// Random streams are derived from `seed`; in shot mode every Π evaluation
/// of one iteration, shifted or not, shares the same stream. Fails with
/// [`DvqaError::Numerical`] if `|‖C‖² − 1| > NORM_TOL` or, in exact mode,
/// `|Im ℓ| > IMAG_TOL` at any iteration.
pub fn train_from(
    obj: &Objective,
    config: &TrainConfig,
    theta0: Vec<Vec<f64>>,
    c0: CorrelationTensor,
    seed: u64,
    deadline: Option<Instant>,
) -> Result<TrainRun> {
    config.validate()?;
    let mut theta = theta0;
    let mut c = c0;
    if config.real_c {
        c.make_real()?;
    } else {
        c.renormalize()?;
    }
    obj.check(&theta, &c)?;
    let counter = CircuitCounter::new();
    let num_theta: usize = theta.iter().map(Vec::len).sum();
    let mut adam_theta = AdamState::new(num_theta);
    let mut adam_c = AdamState::new(2 * c.num_elements());
    let mut records = Vec::with_capacity(config.iterations + 1);
    let mut timed_out = false;
    let mut it = 0;
    loop {
        let ev = obj.evaluate(&theta, &c, &config.mode, stream_seed(&[seed, 3, it as u64]), Some(&counter))?;
        let mut grad_c = split_complex(&ev.grad_c);
        if config.real_c {
            grad_c.iter_mut().skip(1).step_by(2).for_each(|g| *g = 0.0);
        }
        let norm_defect = (c.norm_sqr() - 1.0).abs();
        if norm_defect > NORM_TOL {
            return Err(DvqaError::Numerical(format!(
                "iteration {it}: squared tensor norm is off by {norm_defect:e}"
            )));
        }
        if matches!(config.mode, EvalMode::Exact) && ev.loss.imag.abs() > IMAG_TOL {
            return Err(DvqaError::Numerical(format!(
                "iteration {it}: loss has imaginary part {:e}",
                ev.loss.imag
            )));
        }
        records.push(IterationRecord {
            iteration: it,
            loss: ev.loss.value,
            loss_imag: ev.loss.imag,
            grad_theta_norm: flat_norm(&ev.grad_theta),
            grad_c_norm: grad_c.iter().map(|x| x * x).sum::<f64>().sqrt(),
            c_norm_sqr: c.norm_sqr(),
        });
        if it == config.iterations {
            break;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            timed_out = true;
            break;
        }
        let (move_theta, move_c) = match config.schedule {
            UpdateSchedule::Simultaneous => (true, true),
            UpdateSchedule::Alternating => (it % 2 == 0, it % 2 == 1),
            UpdateSchedule::TensorOnly => (false, true),
        };
        if move_theta {
            let mut flat: Vec<f64> = theta.iter().flatten().copied().collect();
            let grads: Vec<f64> = ev.grad_theta.iter().flatten().copied().collect();
            adam_step(&mut flat, &grads, &mut adam_theta, config)?;
            let mut rest = flat.as_slice();
            for t in theta.iter_mut() {
                let (head, tail) = rest.split_at(t.len());
                t.copy_from_slice(head);
                rest = tail;
            }
        }
        if move_c {
            let mut flat = split_complex(c.params());
            adam_step(&mut flat, &grad_c, &mut adam_c, config)?;
            for (z, pair) in c.params_mut().iter_mut().zip(flat.chunks_exact(2)) {
                *z = Complex64::new(pair[0], pair[1]);
            }
            c.renormalize()?;
        }
        it += 1;
    }
    Ok(TrainRun {
        theta,
        c,
        records,
        timed_out,
        circuits: counter.count(),
    })
}

/// Train `restarts` times from derived seeds and keep the run whose
/// extracted energy is lowest (earliest restart on ties).
pub fn optimize(h: &Hamiltonian, part: &Partition, config: &TrainConfig) -> Result<TrainResult> {
    config.validate()?;
    h.diagonal()?;
    let start = Instant::now();
    let deadline = config
        .time_budget
        .map(|t| start + std::time::Duration::from_secs_f64(t));
    let obj = Objective::new(h, part, config.depth)?;
    let layout = config.layout_for(part.ranks());
    let mut best: Option<(usize, TrainRun, Bitstring, f64)> = None;
    let mut energies = Vec::with_capacity(config.restarts);
    let mut circuits = 0;
    let mut timed_out = false;
    for r in 0..config.restarts {
        let seed = stream_seed(&[config.seed, r as u64]);
        let theta0 = init_theta(&obj, stream_seed(&[seed, 1]));
        let c0 = CorrelationTensor::init_random(part.ranks(), layout, stream_seed(&[seed, 2]))?;
        let run = train_from(&obj, config, theta0, c0, seed, deadline)?;
        let (bits, energy) = extract_solution(h, part, &run.theta, &run.c, config.samples, stream_seed(&[seed, 4]))?;
        energies.push(energy);
        circuits += run.circuits;
        timed_out |= run.timed_out;
        if best.as_ref().is_none_or(|b| energy < b.3) {
            best = Some((r, run, bits, energy));
        }
        if timed_out {
            break;
        }
    }
    let (best_restart, run, best_bitstring, best_energy) = best.expect("at least one restart");
    Ok(TrainResult {
        loss_trace: run.loss_trace(),
        theta_star: run.theta,
        c_star: run.c,
        best_bitstring,
        best_energy,
        wall_time: start.elapsed().as_secs_f64(),
        best_restart,
        restart_energies: energies,
        records: run.records,
        circuits,
        timed_out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{maxcut_hamiltonian, Graph};

    fn edge() -> Hamiltonian {
        maxcut_hamiltonian(&Graph::new(2, [(0, 1, 1.0)]).unwrap())
    }

    #[test]
    fn identity_only_loss_is_constant() {
        let h = Hamiltonian::from_strs(4, &[(2.5, "IIII")], 0.0).unwrap();
        let part = Partition::uniform(4, 2, 2).unwrap();
        let obj = Objective::new(&h, &part, 1).unwrap();
        let theta = init_theta(&obj, 3);
        let c = CorrelationTensor::init_random(&[2, 2], Layout::Dense, 4).unwrap();
        let l = obj.loss(&theta, &c, &EvalMode::Exact, 0).unwrap();
        assert!((l.value - 2.5).abs() < 1e-12);
        let g = obj.grad_theta(&theta, &c, &EvalMode::Exact, 0).unwrap();
        assert!(g.iter().flatten().all(|&x| x == 0.0));
        let (gc, lambda) = obj.grad_c(&theta, &c, &EvalMode::Exact, 0).unwrap();
        assert!(gc.iter().all(|z| z.norm() < 1e-12));
        assert!((lambda - 2.5).abs() < 1e-12);
    }

    #[test]
    fn trivial_circuit_on_single_edge() {
        let h = edge();
        let part = Partition::uniform(2, 2, 1).unwrap();
        let obj = Objective::new(&h, &part, 0).unwrap();
        let c = CorrelationTensor::init_random(&[1, 1], Layout::Dense, 1).unwrap();
        let l = obj.loss(&[vec![0.0], vec![0.0]], &c, &EvalMode::Exact, 0).unwrap();
        let zero = h.classical_energy(&"00".parse().unwrap()).unwrap();
        assert!((l.value - zero).abs() < 1e-12);
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn single_qubit_gradient_is_minus_sine() {
        let h = Hamiltonian::from_strs(1, &[(1.0, "Z")], 0.0).unwrap();
        let part = Partition::uniform(1, 1, 1).unwrap();
        let obj = Objective::new(&h, &part, 0).unwrap();
        let c = CorrelationTensor::init_random(&[1], Layout::Dense, 1).unwrap();
        for t in [-2.0, -0.3, 0.0, 0.8, 2.9] {
            let l = obj.loss(&[vec![t]], &c, &EvalMode::Exact, 0).unwrap().value;
            assert!((l - f64::cos(t)).abs() < 1e-12);
            let g = obj.grad_theta(&[vec![t]], &c, &EvalMode::Exact, 0).unwrap()[0][0];
            assert!((g + f64::sin(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn records_have_fixed_header() {
        let h = edge();
        let part = Partition::uniform(2, 2, 1).unwrap();
        let cfg = TrainConfig {
            iterations: 3,
            depth: 1,
            ..TrainConfig::default()
        };
        let res = optimize(&h, &part, &cfg).unwrap();
        assert_eq!(res.loss_trace.len(), 4);
        let csv = records_csv(&res.records);
        assert!(csv.starts_with(RECORDS_HEADER));
        assert_eq!(csv.lines().count(), 5);
        assert_eq!(res.best_energy, h.classical_energy(&res.best_bitstring).unwrap());
        let json: serde_json::Value = serde_json::from_str(&res.to_json()).unwrap();
        assert_eq!(json["loss_trace"].as_array().unwrap().len(), 4);
        assert_eq!(json["best_bitstring"].as_str().unwrap().len(), 2);
    }

    #[test]
    fn config_validation() {
        let bad = [
            TrainConfig {
                iterations: 0,
                ..TrainConfig::default()
            },
            TrainConfig {
                learning_rate: 0.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                restarts: 0,
                ..TrainConfig::default()
            },
            TrainConfig {
                mode: EvalMode::Shots(0),
                ..TrainConfig::default()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err());
        }
        assert!(TrainConfig::default().validate().is_ok());
    }

    #[test]
    fn time_budget_returns_partial_result() {
        let h = crate::problems::random_qubo(8, 1).unwrap();
        let part = Partition::uniform(8, 2, 2).unwrap();
        let cfg = TrainConfig {
            iterations: 1_000_000,
            time_budget: Some(0.05),
            ..TrainConfig::default()
        };
        let res = optimize(&h, &part, &cfg).unwrap();
        assert!(res.timed_out);
        assert!(res.loss_trace.len() < 1_000_001);
    }
}
