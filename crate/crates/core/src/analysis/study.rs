//! Scaling and noise studies with CSV output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{approximation_ratio, bound_iid, bound_total, brute_force, simulated_annealing, NoiseBoundInput};
use crate::engine::{stream_seed, EvalMode, NoiseModel};
use crate::error::{invalid, DvqaError, Result};
use crate::pauli::{Hamiltonian, Partition, PauliString};
use crate::problems::{maxcut_hamiltonian, random_qubo, synth_graph};
use crate::tensor::{CorrelationTensor, Layout};
use crate::trainer::{init_theta, optimize, train_from, Objective, TrainConfig};

/// Flat `key = value` pairs with `#` comments, each value tagged with its
/// line number.
pub fn parse_kv(text: &str, path: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(DvqaError::Parse {
                path: path.into(),
                line: i + 1,
                message: "expected `key = value`".into(),
            });
        };
        let key = k.trim().to_string();
        if out.insert(key.clone(), (i + 1, v.trim().to_string())).is_some() {
            return Err(DvqaError::Parse {
                path: path.into(),
                line: i + 1,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    Ok(out)
}

struct Kv<'a> {
    path: &'a str,
    map: BTreeMap<String, (usize, String)>,
}

impl Kv<'_> {
    fn err(&self, line: usize, message: String) -> DvqaError {
        DvqaError::Parse {
            path: self.path.into(),
            line,
            message,
        }
    }

    fn take<T: FromStr>(&mut self, key: &str, slot: &mut T) -> Result<()> {
        if let Some((line, v)) = self.map.remove(key) {
            *slot = v
                .parse()
                .map_err(|_| self.err(line, format!("bad value `{v}` for `{key}`")))?;
        }
        Ok(())
    }

    fn take_list<T: FromStr>(&mut self, key: &str, slot: &mut Vec<T>) -> Result<()> {
        if let Some((line, v)) = self.map.remove(key) {
            *slot = v
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| self.err(line, format!("bad list item `{s}` in `{key}`"))))
                .collect::<Result<_>>()?;
        }
        Ok(())
    }

    fn finish(self) -> Result<()> {
        match self.map.into_iter().next() {
            Some((k, (line, _))) => Err(DvqaError::Parse {
                path: self.path.into(),
                line,
                message: format!("unknown key `{k}`"),
            }),
            None => Ok(()),
        }
    }
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// Linear-interpolation quantile of the sorted sample.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub instance: String,
    pub size: usize,
    pub method: String,
    pub run: usize,
    pub achieved: f64,
    pub opt: f64,
    /// `opt` comes from long annealing runs rather than enumeration.
    pub opt_proxy: bool,
    pub ratio: f64,
    pub wall_time: f64,
}

pub const BENCH_HEADER: &str = "instance,size,method,run,achieved,opt,opt_proxy,ratio,wall_time";

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.instance,
            self.size,
            self.method,
            self.run,
            self.achieved,
            self.opt,
            self.opt_proxy,
            self.ratio,
            self.wall_time
        )
    }
}

pub fn bench_csv(records: &[BenchRecord]) -> String {
    let mut out = format!("{BENCH_HEADER}\n");
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub sizes: Vec<usize>,
    pub runs: usize,
    pub width: usize,
    pub rank: usize,
    pub depth: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    /// Expected vertex degree of the random graphs.
    pub degree: f64,
    pub sa_sweeps: usize,
    pub proxy_runs: usize,
    pub proxy_sweeps: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            sizes: vec![10, 60, 120],
            runs: 20,
            width: 6,
            rank: 1,
            depth: 6,
            iterations: 200,
            learning_rate: 0.05,
            degree: 3.0,
            sa_sweeps: 1000,
            proxy_runs: 10,
            proxy_sweeps: 10_000,
            samples: 256,
            seed: 1,
        }
    }
}

impl ScalingConfig {
    pub fn from_kv(text: &str, path: &str) -> Result<Self> {
        let mut kv = Kv {
            path,
            map: parse_kv(text, path)?,
        };
        let mut c = ScalingConfig::default();
        kv.take_list("sizes", &mut c.sizes)?;
        kv.take("runs", &mut c.runs)?;
        kv.take("width", &mut c.width)?;
        kv.take("rank", &mut c.rank)?;
        kv.take("depth", &mut c.depth)?;
        kv.take("iterations", &mut c.iterations)?;
        kv.take("learning_rate", &mut c.learning_rate)?;
        kv.take("degree", &mut c.degree)?;
        kv.take("sa_sweeps", &mut c.sa_sweeps)?;
        kv.take("proxy_runs", &mut c.proxy_runs)?;
        kv.take("proxy_sweeps", &mut c.proxy_sweeps)?;
        kv.take("samples", &mut c.samples)?;
        kv.take("seed", &mut c.seed)?;
        kv.finish()?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.sizes.iter().any(|&n| n < 2) {
            return Err(invalid("sizes must be non-empty and at least 2"));
        }
        if self.runs == 0 || self.width == 0 || self.rank == 0 || self.proxy_runs == 0 {
            return Err(invalid("runs, width, rank and proxy_runs must be positive"));
        }
        if !(self.degree > 0.0) {
            return Err(invalid("degree must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub size: usize,
    pub num_edges: usize,
    pub opt: f64,
    pub opt_proxy: bool,
    pub ratio_mean: f64,
    pub ratio_std: f64,
    pub ratio_median: f64,
    pub ratio_q1: f64,
    pub ratio_q3: f64,
    pub sa_ratio_median: f64,
    pub time_median: f64,
    pub sa_time_median: f64,
}

pub const SCALING_HEADER: &str = "size,num_edges,opt,opt_proxy,ratio_mean,ratio_std,ratio_median,ratio_q1,ratio_q3,sa_ratio_median,time_median,sa_time_median";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub records: Vec<BenchRecord>,
    pub rows: Vec<ScalingRow>,
}

impl ScalingStudy {
    pub fn rows_csv(&self) -> String {
        let mut out = format!("{SCALING_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.size,
                r.num_edges,
                r.opt,
                r.opt_proxy,
                r.ratio_mean,
                r.ratio_std,
                r.ratio_median,
                r.ratio_q1,
                r.ratio_q3,
                r.sa_ratio_median,
                r.time_median,
                r.sa_time_median
            );
        }
        out
    }

    pub fn records_csv(&self) -> String {
        bench_csv(&self.records)
    }

    /// Log-log slope of median training time against size.
    pub fn time_slope(&self) -> f64 {
        let xs: Vec<f64> = self.rows.iter().map(|r| r.size as f64).collect();
        let ys: Vec<f64> = self.rows.iter().map(|r| r.time_median).collect();
        loglog_slope(&xs, &ys)
    }
}

/// Reference optimum: enumeration up to 24 qubits, otherwise the best of
/// `runs` long annealing runs (flagged as a proxy).
pub fn reference_optimum(h: &Hamiltonian, runs: usize, sweeps: usize, seed: u64) -> Result<(f64, bool)> {
    if h.num_qubits() <= super::MAX_BRUTE_FORCE_QUBITS {
        return Ok((brute_force(h)?.1, false));
    }
    let best = (0..runs)
        .into_par_iter()
        .map(|r| simulated_annealing(h, sweeps, None, stream_seed(&[seed, r as u64])).map(|o| o.energy))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok((best, true))
}

pub fn scaling_instance(cfg: &ScalingConfig, n: usize) -> Result<Hamiltonian> {
    let density = (cfg.degree / (n - 1) as f64).min(1.0);
    Ok(maxcut_hamiltonian(&synth_graph(n, density, stream_seed(&[cfg.seed, n as u64]))?))
}

fn ratio_or_inf(opt: f64, achieved: f64) -> f64 {
    approximation_ratio(opt, achieved).unwrap_or(f64::INFINITY)
}

/// `runs` trainings and `runs` annealing baselines on one instance, against
/// a fixed reference optimum. `key` separates the seed streams of
/// different instances.
pub fn bench_instance(
    name: &str,
    h: &Hamiltonian,
    cfg: &ScalingConfig,
    opt: f64,
    opt_proxy: bool,
    key: u64,
) -> Result<Vec<BenchRecord>> {
    let n = h.num_qubits();
    let part = Partition::blocks(n, cfg.width, cfg.rank)?;
    let cells: Vec<(&str, usize)> = ["dvqa", "sa"]
        .iter()
        .flat_map(|&m| (0..cfg.runs).map(move |r| (m, r)))
        .collect();
    cells
        .par_iter()
        .map(|&(method, run)| {
            let seed = stream_seed(&[cfg.seed, key, 2, run as u64]);
            let start = Instant::now();
            let achieved = if method == "dvqa" {
                let tc = TrainConfig {
                    iterations: cfg.iterations,
                    learning_rate: cfg.learning_rate,
                    depth: cfg.depth,
                    samples: cfg.samples,
                    seed,
                    ..TrainConfig::default()
                };
                optimize(h, &part, &tc)?.best_energy
            } else {
                simulated_annealing(h, cfg.sa_sweeps, None, seed)?.energy
            };
            Ok(BenchRecord {
                instance: name.to_string(),
                size: n,
                method: method.into(),
                run,
                achieved,
                opt,
                opt_proxy,
                ratio: ratio_or_inf(opt, achieved),
                wall_time: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

/// The benchmark protocol over named instances; instance `i` uses seed key
/// `i` and its reference optimum comes from [`reference_optimum`].
pub fn run_bench(instances: &[(String, Hamiltonian)], cfg: &ScalingConfig) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for (i, (name, h)) in instances.iter().enumerate() {
        let key = i as u64;
        let (opt, proxy) = reference_optimum(h, cfg.proxy_runs, cfg.proxy_sweeps, stream_seed(&[cfg.seed, key, 1]))?;
        out.extend(bench_instance(name, h, cfg, opt, proxy, key)?);
    }
    Ok(out)
}

/// Per size: the benchmark protocol on one random MaxCut graph.
pub fn run_scaling_study(cfg: &ScalingConfig) -> Result<ScalingStudy> {
    cfg.validate()?;
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        let h = scaling_instance(cfg, n)?;
        let (opt, proxy) = reference_optimum(&h, cfg.proxy_runs, cfg.proxy_sweeps, stream_seed(&[cfg.seed, n as u64, 1]))?;
        let cell_records = bench_instance(&format!("maxcut-n{n}"), &h, cfg, opt, proxy, n as u64)?;
        let pick = |m: &str, f: fn(&BenchRecord) -> f64| -> Vec<f64> {
            cell_records.iter().filter(|r| r.method == m).map(f).collect()
        };
        let ratios = pick("dvqa", |r| r.ratio);
        let (ratio_mean, ratio_std) = mean_std(&ratios);
        rows.push(ScalingRow {
            size: n,
            num_edges: h.num_terms(),
            opt,
            opt_proxy: proxy,
            ratio_mean,
            ratio_std,
            ratio_median: median(&ratios),
            ratio_q1: quantile(&ratios, 0.25),
            ratio_q3: quantile(&ratios, 0.75),
            sa_ratio_median: median(&pick("sa", |r| r.ratio)),
            time_median: median(&pick("dvqa", |r| r.wall_time)),
            sa_time_median: median(&pick("sa", |r| r.wall_time)),
        });
        records.extend(cell_records);
    }
    Ok(ScalingStudy { records, rows })
}

/// Hamiltonians available to the noise study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseHamiltonian {
    /// Dense random QUBO with uniform weights in `[−1, 1]`.
    RandomQubo,
    /// `Z` on the first and last qubit.
    EndZz,
}

impl NoiseHamiltonian {
    pub fn name(self) -> &'static str {
        match self {
            NoiseHamiltonian::RandomQubo => "random_qubo",
            NoiseHamiltonian::EndZz => "end_zz",
        }
    }

    pub fn build(self, n: usize, seed: u64) -> Result<Hamiltonian> {
        match self {
            NoiseHamiltonian::RandomQubo => random_qubo(n, seed),
            NoiseHamiltonian::EndZz => {
                if n < 2 {
                    return Err(invalid("end_zz needs at least 2 qubits"));
                }
                Hamiltonian::new(n, [(1.0, PauliString::z_on(n, &[0, n - 1]))], 0.0)
            }
        }
    }
}

impl FromStr for NoiseHamiltonian {
    type Err = DvqaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random_qubo" => Ok(NoiseHamiltonian::RandomQubo),
            "end_zz" => Ok(NoiseHamiltonian::EndZz),
            other => Err(invalid(format!("unknown hamiltonian `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub num_qubits: usize,
    pub ks: Vec<usize>,
    pub runs: usize,
    pub p1: f64,
    pub p2: f64,
    pub depth: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    pub rank: usize,
    /// Independent trainings per run; the lowest final loss is kept.
    pub restarts: usize,
    pub c_b: f64,
    pub eps_c: f64,
    pub hamiltonians: Vec<NoiseHamiltonian>,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            num_qubits: 10,
            ks: vec![2, 5, 10],
            runs: 10,
            p1: 0.01,
            p2: 0.2,
            depth: 6,
            iterations: 200,
            learning_rate: 0.05,
            rank: 1,
            restarts: 12,
            c_b: 1.0,
            eps_c: 0.0,
            hamiltonians: vec![NoiseHamiltonian::RandomQubo, NoiseHamiltonian::EndZz],
            seed: 1,
        }
    }
}

impl NoiseConfig {
    pub fn from_kv(text: &str, path: &str) -> Result<Self> {
        let mut kv = Kv {
            path,
            map: parse_kv(text, path)?,
        };
        let mut c = NoiseConfig::default();
        kv.take("num_qubits", &mut c.num_qubits)?;
        kv.take_list("ks", &mut c.ks)?;
        kv.take("runs", &mut c.runs)?;
        kv.take("p1", &mut c.p1)?;
        kv.take("p2", &mut c.p2)?;
        kv.take("depth", &mut c.depth)?;
        kv.take("iterations", &mut c.iterations)?;
        kv.take("learning_rate", &mut c.learning_rate)?;
        kv.take("rank", &mut c.rank)?;
        kv.take("restarts", &mut c.restarts)?;
        kv.take("c_b", &mut c.c_b)?;
        kv.take("eps_c", &mut c.eps_c)?;
        kv.take_list("hamiltonians", &mut c.hamiltonians)?;
        kv.take("seed", &mut c.seed)?;
        kv.finish()?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ks.is_empty() || self.runs == 0 || self.hamiltonians.is_empty() || self.rank == 0 || self.restarts == 0 {
            return Err(invalid("ks, runs, rank, restarts and hamiltonians must be non-empty/positive"));
        }
        for &k in &self.ks {
            if k == 0 || !self.num_qubits.is_multiple_of(k) {
                return Err(invalid(format!("K = {k} does not divide N = {}", self.num_qubits)));
            }
        }
        NoiseModel::new(self.p1, self.p2)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRun {
    pub hamiltonian: String,
    pub k: usize,
    pub run: usize,
    pub e_sim: f64,
    pub delta: f64,
    pub bound_iid: f64,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    pub hamiltonian: String,
    pub k: usize,
    pub width: usize,
    pub runs: usize,
    pub e_ref: f64,
    pub delta_mean: f64,
    pub delta_std: f64,
    pub f_sub: f64,
    pub bound_iid: f64,
    pub bound_total: f64,
    pub within_bound: usize,
    pub time_mean: f64,
}

pub const NOISE_HEADER: &str =
    "hamiltonian,k,width,runs,e_ref,delta_mean,delta_std,f_sub,bound_iid,bound_total,within_bound,time_mean";
pub const NOISE_RUNS_HEADER: &str = "hamiltonian,k,run,e_sim,delta,bound_iid,wall_time";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseStudy {
    pub runs: Vec<NoiseRun>,
    pub rows: Vec<NoiseRow>,
}

impl NoiseStudy {
    pub fn rows_csv(&self) -> String {
        let mut out = format!("{NOISE_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.hamiltonian,
                r.k,
                r.width,
                r.runs,
                r.e_ref,
                r.delta_mean,
                r.delta_std,
                r.f_sub,
                r.bound_iid,
                r.bound_total,
                r.within_bound,
                r.time_mean
            );
        }
        out
    }

    pub fn runs_csv(&self) -> String {
        let mut out = format!("{NOISE_RUNS_HEADER}\n");
        for r in &self.runs {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.hamiltonian, r.k, r.run, r.e_sim, r.delta, r.bound_iid, r.wall_time
            );
        }
        out
    }
}

/// Noisy training for every `(Hamiltonian, K, run)` cell. `E_sim` is the
/// lowest final noisy loss over the run's restarts and `ΔH = |E_sim − E_g|` with `E_g` the enumerated
/// ground energy.
pub fn run_noise_study(cfg: &NoiseConfig) -> Result<NoiseStudy> {
    cfg.validate()?;
    let noise = NoiseModel::new(cfg.p1, cfg.p2)?;
    let mut runs = Vec::new();
    let mut rows = Vec::new();
    for &which in &cfg.hamiltonians {
        let h = which.build(cfg.num_qubits, stream_seed(&[cfg.seed, 0x51]))?;
        let e_g = brute_force(&h)?.1;
        for &k in &cfg.ks {
            let width = cfg.num_qubits / k;
            let part = Partition::uniform(cfg.num_qubits, k, cfg.rank)?;
            let inp = NoiseBoundInput {
                p1: cfg.p1,
                p2: cfg.p2,
                depth: cfg.depth,
                width,
                r_max: cfg.rank,
                locality: h.locality(),
                e_ref: e_g,
                c_b: cfg.c_b,
                eps_c: cfg.eps_c,
            };
            let bound = bound_iid(&inp);
            let obj = Objective::new(&h, &part, cfg.depth)?;
            let tc = TrainConfig {
                iterations: cfg.iterations,
                learning_rate: cfg.learning_rate,
                depth: cfg.depth,
                mode: EvalMode::Noisy(noise),
                ..TrainConfig::default()
            };
            let cell = (0..cfg.runs)
                .into_par_iter()
                .map(|run| {
                    let start = Instant::now();
                    let mut e_sim = f64::INFINITY;
                    for r in 0..cfg.restarts {
                        let seed = stream_seed(&[cfg.seed, k as u64, run as u64, r as u64]);
                        let layout = Layout::auto(part.ranks(), 8);
                        let c0 = CorrelationTensor::init_random(part.ranks(), layout, stream_seed(&[seed, 2]))?;
                        let theta0 = init_theta(&obj, stream_seed(&[seed, 1]));
                        let out = train_from(&obj, &tc, theta0, c0, seed, None)?;
                        e_sim = e_sim.min(out.records.last().expect("non-empty trace").loss);
                    }
                    Ok(NoiseRun {
                        hamiltonian: which.name().into(),
                        k,
                        run,
                        e_sim,
                        delta: (e_sim - e_g).abs(),
                        bound_iid: bound,
                        wall_time: start.elapsed().as_secs_f64(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let deltas: Vec<f64> = cell.iter().map(|r| r.delta).collect();
            let (delta_mean, delta_std) = mean_std(&deltas);
            rows.push(NoiseRow {
                hamiltonian: which.name().into(),
                k,
                width,
                runs: cfg.runs,
                e_ref: e_g,
                delta_mean,
                delta_std,
                f_sub: super::f_sub(&inp),
                bound_iid: bound,
                bound_total: bound_total(&inp),
                within_bound: cell.iter().filter(|r| r.delta <= r.bound_iid).count(),
                time_mean: cell.iter().map(|r| r.wall_time).sum::<f64>() / cfg.runs as f64,
            });
            runs.extend(cell);
        }
    }
    Ok(NoiseStudy { runs, rows })
}
