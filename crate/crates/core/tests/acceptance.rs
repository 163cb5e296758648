//! Acceptance criteria: one PASS/FAIL line each. Pass criterion numbers as
//! arguments to run a subset, e.g. `cargo test --test acceptance -- 1 7`.

use std::process::ExitCode;
use std::time::Instant;

use dvqa::analysis::{
    approximation_ratio, bound_iid, bound_noniid, bound_total, brute_force, f_sub, loglog_slope, reference_optimum,
    resource_estimate, run_noise_study, run_scaling_study, scaling_instance, shot_budget, NoiseBoundInput,
    NoiseConfig, ScalingConfig,
};
use dvqa::engine::{pi_exact, pi_hadamard_estimate, stream_seed, AnsatzSpec, CircuitCounter, EvalMode};
use dvqa::error::DvqaError;
use dvqa::pauli::{Bitstring, Hamiltonian, PauliString, Partition};
use dvqa::problems::{maxcut_hamiltonian, portfolio_hamiltonian, random_qubo, synth_portfolio, Graph, PortfolioEncoding};
use dvqa::tensor::{CorrelationTensor, Layout};
use dvqa::trainer::{init_theta, optimize, reconstruct_state, Objective, TrainConfig, TrainResult, IMAG_TOL, NORM_TOL};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Training runs of criteria 3 to 5, for the invariant audit.
#[derive(Default)]
struct Audit {
    ran: bool,
    runs: usize,
    violations: usize,
    notes: Vec<String>,
}

impl Audit {
    fn record(&mut self, r: &TrainResult, exact: bool) {
        self.runs += 1;
        let bad = r
            .records
            .iter()
            .filter(|x| (x.c_norm_sqr - 1.0).abs() > NORM_TOL || (exact && x.loss_imag.abs() > IMAG_TOL))
            .count();
        self.violations += bad;
    }

    fn error(&mut self, e: &DvqaError) {
        if matches!(e, DvqaError::Numerical(_)) {
            self.violations += 1;
            self.notes.push(e.to_string());
        }
    }
}

/// Sizes splitting `n` into `k` near-equal contiguous blocks.
fn split(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|j| n / k + usize::from(j < n % k)).collect()
}

fn random_setup(rng: &mut ChaCha8Rng, max_n: usize) -> (Hamiltonian, Partition, usize, Layout) {
    let n = rng.random_range(4..=max_n);
    let k = rng.random_range(2..=3);
    let sizes = split(n, k);
    let ranks = sizes.iter().map(|&d| rng.random_range(1..=3usize.min(1 << d))).collect();
    let part = Partition::new(sizes, ranks).unwrap();
    let depth = rng.random_range(1..=2);
    let layout = if rng.random_bool(0.5) {
        Layout::Dense
    } else {
        Layout::Train {
            bond: rng.random_range(1..=3),
        }
    };
    (random_qubo(n, rng.random()).unwrap(), part, depth, layout)
}

fn oracle_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
        let (h, part, depth, layout) = random_setup(&mut rng, 10);
        let obj = Objective::new(&h, &part, depth).unwrap();
        let theta = init_theta(&obj, rng.random());
        let c = CorrelationTensor::init_random(part.ranks(), layout, rng.random()).unwrap();
        let loss = obj.loss(&theta, &c, &EvalMode::Exact, 0).unwrap().value;
        let phi = reconstruct_state(&part, &theta, &c).unwrap();
        let diag = h.diagonal().unwrap();
        let n = h.num_qubits();
        let e: f64 = phi
            .state
            .probabilities()
            .iter()
            .enumerate()
            .map(|(x, p)| p * diag.energy(Bitstring::from_index(x as u64, n).bits()))
            .sum();
        worst = worst.max((loss - e).abs());
    }
    outcome(worst < 1e-9, format!("max |loss - <phi|H|phi>| = {worst:.2e} over 50 instances (tol 1e-9)"))
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let d = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let s = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if s > 1e-10 {
        d / s
    } else {
        d
    }
}

fn gradient_checks() -> Outcome {
    let step = 1e-5;
    let mode = EvalMode::Exact;
    let (mut worst_t, mut worst_c) = (0.0f64, 0.0f64);
    for i in 0..24 {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + i);
        let (h, part, depth, layout) = random_setup(&mut rng, 8);
        let obj = Objective::new(&h, &part, depth).unwrap();
        let theta = init_theta(&obj, rng.random());
        let c = CorrelationTensor::init_random(part.ranks(), layout, rng.random()).unwrap();

        let loss_at = |th: &[Vec<f64>]| obj.loss(th, &c, &mode, 0).unwrap().value;
        let mut fd = Vec::new();
        for k in 0..theta.len() {
            for t in 0..theta[k].len() {
                let mut p = theta.clone();
                p[k][t] += step;
                let mut m = theta.clone();
                m[k][t] -= step;
                fd.push((loss_at(&p) - loss_at(&m)) / (2.0 * step));
            }
        }
        let an: Vec<f64> = obj.grad_theta(&theta, &c, &mode, 0).unwrap().concat();
        worst_t = worst_t.max(rel_err(&an, &fd));

        let offset = h.offset();
        let sphere_loss = |t: &CorrelationTensor| offset + (obj.loss(&theta, t, &mode, 0).unwrap().value - offset) / t.norm_sqr();
        let mut fd = Vec::new();
        for j in 0..c.params().len() {
            for unit in [Complex64::new(step, 0.0), Complex64::new(0.0, step)] {
                let mut p = c.clone();
                p.params_mut()[j] += unit;
                let mut m = c.clone();
                m.params_mut()[j] -= unit;
                fd.push((sphere_loss(&p) - sphere_loss(&m)) / (2.0 * step));
            }
        }
        let (gc, _) = obj.grad_c(&theta, &c, &mode, 0).unwrap();
        let an: Vec<f64> = gc.iter().flat_map(|z| [z.re, z.im]).collect();
        worst_c = worst_c.max(rel_err(&an, &fd));
    }
    outcome(
        worst_t < 1e-5 && worst_c < 1e-5,
        format!("max relative error theta {worst_t:.2e}, C {worst_c:.2e} over 24 instances (tol 1e-5)"),
    )
}

fn solved(h: &Hamiltonian, part: &Partition, config: &TrainConfig, opt: f64, audit: &mut Audit) -> bool {
    match optimize(h, part, config) {
        Ok(r) => {
            audit.record(&r, true);
            (r.best_energy - opt).abs() < 1e-9
        }
        Err(e) => {
            audit.error(&e);
            false
        }
    }
}

fn small_instances(audit: &mut Audit) -> Outcome {
    audit.ran = true;
    let edge = maxcut_hamiltonian(&Graph::new(2, [(0, 1, 1.0)]).unwrap());
    let tri = maxcut_hamiltonian(&Graph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap());
    let edge_part = Partition::uniform(2, 2, 1).unwrap();
    let tri_part = Partition::uniform(3, 3, 2).unwrap();
    let po = portfolio_hamiltonian(&synth_portfolio(20, 7).unwrap(), PortfolioEncoding::Printed);
    let po_part = Partition::uniform(20, 4, 1).unwrap();
    let po_opt = brute_force(&po).unwrap().1;

    let count = |h: &Hamiltonian, part: &Partition, layout: Option<Layout>, restarts: usize, audit: &mut Audit| {
        (0..20u64)
            .filter(|&s| {
                let config = TrainConfig {
                    seed: stream_seed(&[0xC3, s]),
                    layout,
                    restarts,
                    ..TrainConfig::default()
                };
                solved(h, part, &config, brute_force(h).unwrap().1, audit)
            })
            .count()
    };
    let e = count(&edge, &edge_part, None, 1, audit);
    let t = count(&tri, &tri_part, Some(Layout::Dense), 1, audit);
    let p = {
        let mut hits = 0;
        for s in 0..20u64 {
            let config = TrainConfig {
                seed: stream_seed(&[0xC3, s]),
                restarts: 8,
                ..TrainConfig::default()
            };
            hits += usize::from(solved(&po, &po_part, &config, po_opt, audit));
        }
        hits
    };
    outcome(
        e >= 18 && t >= 18 && p >= 15,
        format!("edge {e}/20, triangle {t}/20 (need 18), portfolio {p}/20 (need 15, 8 restarts each)"),
    )
}

fn scaling(audit: &mut Audit) -> Outcome {
    audit.ran = true;
    let cfg = ScalingConfig::default();
    let study = match run_scaling_study(&cfg) {
        Ok(s) => s,
        Err(e) => {
            audit.error(&e);
            return outcome(false, format!("scaling study failed: {e}"));
        }
    };
    audit.runs += study.records.iter().filter(|r| r.method == "dvqa").count();
    let medians: Vec<String> = study
        .rows
        .iter()
        .map(|r| format!("N={} {:.3}", r.size, r.ratio_median))
        .collect();
    let medians_ok = study.rows.iter().all(|r| r.ratio_median <= 1.2);

    let big = 1000;
    let h = scaling_instance(&cfg, big).unwrap();
    let (proxy, _) = reference_optimum(&h, cfg.proxy_runs, cfg.proxy_sweeps, stream_seed(&[cfg.seed, big as u64, 1])).unwrap();
    let part = Partition::blocks(big, cfg.width, cfg.rank).unwrap();
    let config = TrainConfig {
        iterations: cfg.iterations,
        learning_rate: cfg.learning_rate,
        depth: cfg.depth,
        seed: stream_seed(&[cfg.seed, big as u64, 2, 0]),
        ..TrainConfig::default()
    };
    let start = Instant::now();
    let (big_ratio, big_time) = match optimize(&h, &part, &config) {
        Ok(r) => {
            audit.record(&r, true);
            (approximation_ratio(proxy, r.best_energy).unwrap_or(f64::INFINITY), start.elapsed().as_secs_f64())
        }
        Err(e) => {
            audit.error(&e);
            return outcome(false, format!("N=1000 run failed: {e}"));
        }
    };
    let mut xs: Vec<f64> = study.rows.iter().map(|r| r.size as f64).collect();
    let mut ys: Vec<f64> = study.rows.iter().map(|r| r.time_median).collect();
    xs.push(big as f64);
    ys.push(big_time);
    let slope = loglog_slope(&xs, &ys);
    outcome(
        medians_ok && big_ratio <= 1.3 && slope < 3.0,
        format!(
            "median ratios [{}] (<= 1.2); N=1000 ratio {big_ratio:.3} vs annealing proxy (<= 1.3) in {big_time:.1}s; time slope {slope:.2} (< 3)",
            medians.join(", ")
        ),
    )
}

fn noise(audit: &mut Audit) -> Outcome {
    audit.ran = true;
    let cfg = NoiseConfig::default();
    let study = match run_noise_study(&cfg) {
        Ok(s) => s,
        Err(e) => {
            audit.error(&e);
            return outcome(false, format!("noise study failed: {e}"));
        }
    };
    audit.runs += study.runs.len() * cfg.restarts;
    let mut pass = true;
    let mut parts = Vec::new();
    for which in &cfg.hamiltonians {
        let rows: Vec<_> = study.rows.iter().filter(|r| r.hamiltonian == which.name()).collect();
        let decreasing = rows.windows(2).all(|w| w[1].delta_mean < w[0].delta_mean);
        let bounded = rows.iter().all(|r| r.within_bound >= 9);
        pass &= decreasing && bounded;
        let cells: Vec<String> = rows
            .iter()
            .map(|r| format!("K={} dH {:.4} bound {:.4} within {}/{}", r.k, r.delta_mean, r.bound_iid, r.within_bound, r.runs))
            .collect();
        parts.push(format!(
            "{}: {} (decreasing: {decreasing}, bounded: {bounded})",
            which.name(),
            cells.join("; ")
        ));
    }
    outcome(pass, parts.join(" | "))
}

fn invariants(audit: &Audit) -> Outcome {
    if !audit.ran {
        return outcome(false, "criteria 3-5 were not run in this invocation");
    }
    let mut detail = format!(
        "{} violations of |norm^2 - 1| <= {NORM_TOL:e} / |Im loss| <= {IMAG_TOL:e} across {} training runs",
        audit.violations, audit.runs
    );
    if let Some(first) = audit.notes.first() {
        detail.push_str(&format!("; first: {first}"));
    }
    outcome(audit.violations == 0, detail)
}

fn estimator() -> Outcome {
    let spec = AnsatzSpec::new(3, 2);
    let theta: Vec<f64> = (0..spec.num_params()).map(|i| 0.37 * i as f64 - 1.2).collect();
    let p: PauliString = "ZXZ".parse().unwrap();
    let shots = [100u64, 1_000, 10_000];
    let sds: Vec<f64> = shots
        .iter()
        .map(|&s| {
            let est: Vec<f64> = (0..200)
                .map(|r| pi_hadamard_estimate(&spec, &theta, &p, 1, 2, s, stream_seed(&[s, r])).unwrap().re)
                .collect();
            let mean = est.iter().sum::<f64>() / est.len() as f64;
            (est.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (est.len() - 1) as f64).sqrt()
        })
        .collect();
    let xs: Vec<f64> = shots.iter().map(|&s| s as f64).collect();
    let slope = loglog_slope(&xs, &sds);
    let exact = pi_exact(&spec, &theta, &p, 1, 2).unwrap();

    let uniform = |d: usize| CorrelationTensor::from_dense(&[d], vec![Complex64::new(1.0 / (d as f64).sqrt(), 0.0); d]).unwrap();
    let c4 = uniform(4).l1_norm().unwrap();
    let c16 = uniform(16).l1_norm().unwrap();
    let eps_scaling = [(1.0, 1.0, 0.1), (2.0, 1.0, 0.2), (3.0, 2.0, 0.5)]
        .iter()
        .all(|&(w, c, e)| shot_budget(w, c, e / 2.0).unwrap() == 4 * shot_budget(w, c, e).unwrap());
    let c_scaling = shot_budget(1.0, c16, 0.1).unwrap() == 16 * shot_budget(1.0, c4, 0.1).unwrap();
    let base = shot_budget(1.0, 1.0, 0.1).unwrap() == 100;
    outcome(
        (slope + 0.5).abs() <= 0.1 && eps_scaling && c_scaling && base,
        format!(
            "std {:.4}/{:.4}/{:.4} at 1e2/1e3/1e4 shots (|Pi| = {:.3}), slope {slope:.3} (-0.5 +- 0.1); eps^-2 scaling {eps_scaling}, ||C||_1^4 scaling {c_scaling}, budget(1,1,0.1) = 100 {base}",
            sds[0],
            sds[1],
            sds[2],
            exact.norm()
        ),
    )
}

fn formulas() -> Outcome {
    let mut fails = Vec::new();
    let mut check = |name: &str, got: f64, want: f64| {
        if (got - want).abs() > 1e-12 {
            fails.push(format!("{name}: got {got}, want {want}"));
        }
    };
    let base = NoiseBoundInput {
        p1: 0.0,
        p2: 0.0,
        depth: 6,
        width: 5,
        r_max: 1,
        locality: 2,
        e_ref: -4.0,
        c_b: 1.0,
        eps_c: 0.0,
    };
    check("f_sub noiseless", f_sub(&base), 1.0);
    check("bound_iid noiseless", bound_iid(&base), 0.0);
    let half = NoiseBoundInput {
        p1: 1.0 - 0.5f64.powf(1.0 / 5.0),
        depth: 1,
        width: 1,
        ..base
    };
    check("f_sub one half", f_sub(&half), 0.5);
    check("bound_iid f=1/2 p=2 |E|=4", bound_iid(&half), 3.0);
    let nonid = NoiseBoundInput { eps_c: 0.1, ..base };
    check("bound_noniid", bound_noniid(&nonid), 1.2);
    let iid = NoiseBoundInput {
        p1: 0.01,
        p2: 0.2,
        ..base
    };
    check("bound_noniid eps_c=0", bound_noniid(&iid), 0.0);
    check("bound_total eps_c=0", bound_total(&iid), bound_iid(&iid));
    let mixed = NoiseBoundInput { eps_c: 0.3, ..iid };
    check("bound_total additive", bound_total(&mixed), bound_iid(&mixed) + bound_noniid(&mixed));
    check("f_sub d=5 D=6", f_sub(&iid), 0.99f64.powi(34) * 0.8f64.powi(24));
    check("ratio equal", approximation_ratio(-2.0, -2.0).unwrap(), 1.0);
    check("ratio -2/-1.6", approximation_ratio(-2.0, -1.6).unwrap(), 1.25);
    check("shots(1,1,0.1)", shot_budget(1.0, 1.0, 0.1).unwrap() as f64, 100.0);

    let h = random_qubo(6, 3).unwrap();
    let part1 = Partition::uniform(6, 3, 1).unwrap();
    let est1 = resource_estimate(&h, &part1, 2).unwrap();
    let factors: usize = h.partition_terms(&part1).unwrap().iter().map(|t| t.active_subsystems().count()).sum();
    check("variants at R=1", est1.circuit_variants as f64, 2.0 * factors as f64);
    let part2 = Partition::uniform(6, 3, 2).unwrap();
    let est2 = resource_estimate(&h, &part2, 2).unwrap();
    check("formula doubling R", est2.circuit_formula / est1.circuit_formula, 256.0);

    let obj = Objective::new(&h, &part2, 2).unwrap();
    let theta = init_theta(&obj, 1);
    let c = CorrelationTensor::init_random(part2.ranks(), Layout::Dense, 1).unwrap();
    let counter = CircuitCounter::new();
    obj.loss_counted(&theta, &c, &EvalMode::Shots(10), 0, Some(&counter)).unwrap();
    check("instrumented count", counter.count() as f64, est2.distinct_circuit_variants as f64);
    let n = fails.len();
    outcome(
        n == 0,
        if n == 0 {
            format!("all arithmetic cases exact; instrumented run executed {} circuits as estimated", counter.count())
        } else {
            fails.join("; ")
        },
    )
}

fn main() -> ExitCode {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let run = |n: usize| wanted.is_empty() || wanted.contains(&n);
    let mut audit = Audit::default();
    let mut all = true;
    let mut report = |n: usize, name: &str, f: &mut dyn FnMut(&mut Audit) -> Outcome, audit: &mut Audit| {
        let start = Instant::now();
        let o = f(audit);
        all &= o.pass;
        println!(
            "criterion {n} {} [{name}] {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    };
    if run(1) {
        report(1, "oracle equivalence", &mut |_| oracle_equivalence(), &mut audit);
    }
    if run(2) {
        report(2, "gradient checks", &mut |_| gradient_checks(), &mut audit);
    }
    if run(3) {
        report(3, "small-instance solving", &mut small_instances, &mut audit);
    }
    if run(4) {
        report(4, "scaling study", &mut scaling, &mut audit);
    }
    if run(5) {
        report(5, "noise study", &mut noise, &mut audit);
    }
    if run(6) {
        report(6, "normalization and realness", &mut |a| invariants(a), &mut audit);
    }
    if run(7) {
        report(7, "estimator statistics", &mut |_| estimator(), &mut audit);
    }
    if run(8) {
        report(8, "formula suite", &mut |_| formulas(), &mut audit);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
