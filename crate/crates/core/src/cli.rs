//! Command-line front end: `solve`, `bench`, `noise`, `gradcheck` and
//! `brute`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::analysis::{
    approximation_ratio, bench_csv, brute_force, median, run_bench, run_noise_study, run_scaling_study,
    BenchRecord, NoiseConfig, NoiseHamiltonian, ScalingConfig, MAX_BRUTE_FORCE_QUBITS,
};
use crate::engine::{EvalMode, NoiseModel};
use crate::error::DvqaError;
use crate::pauli::{Hamiltonian, Partition};
use crate::problems::{
    load_graph, load_portfolio, maxcut_hamiltonian, portfolio_hamiltonian, random_qubo, PortfolioEncoding,
    PortfolioInstance,
};
use crate::tensor::{write_checkpoint, CorrelationTensor, Layout};
use crate::trainer::{finite_difference_check, init_theta, optimize, records_csv, Objective, TrainConfig, UpdateSchedule};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "DVQA_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "dvqa-out";

#[derive(Debug, Parser)]
#[command(name = "dvqa", version, about = "Distributed variational quantum optimization")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory (default: $DVQA_OUT_DIR, else ./dvqa-out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write 0 into wall-clock columns so reruns are byte-identical.
    #[arg(long, global = true)]
    pub no_timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train on one problem file and extract the best bitstring.
    Solve(SolveArgs),
    /// Repeated DVQA and annealing runs with ratio statistics.
    Bench(BenchArgs),
    /// Noisy training against the deviation bounds.
    Noise(NoiseArgs),
    /// Compare analytic gradients with central finite differences.
    Gradcheck(GradcheckArgs),
    /// Exact optimum by enumeration.
    Brute(BruteArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Maxcut,
    Portfolio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeKind {
    Exact,
    Shots,
    Noisy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayoutKind {
    Auto,
    Dense,
    Train,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EncodingKind {
    Printed,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Simultaneous,
    Alternating,
    TensorOnly,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProblemArgs {
    #[arg(long, value_enum, default_value = "maxcut")]
    pub problem: ProblemKind,
    /// Problem file: an edge list or a portfolio instance.
    #[arg(long)]
    pub input: PathBuf,
    /// Ising encoding of portfolio instances.
    #[arg(long, value_enum, default_value = "printed")]
    pub encoding: EncodingKind,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Number of equal subsystems (must divide N).
    #[arg(long, conflicts_with = "width")]
    pub k: Option<usize>,
    /// Subsystem width; the last block takes the remainder.
    #[arg(long)]
    pub width: Option<usize>,
    /// Rank R_k of every subsystem.
    #[arg(long, default_value_t = 1)]
    pub rank: usize,
    /// Bond dimension of the tensor-train layout.
    #[arg(long, default_value_t = 8)]
    pub bond: usize,
    #[arg(long, value_enum, default_value = "auto")]
    pub layout: LayoutKind,
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
    #[arg(long, default_value_t = 200)]
    pub iters: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeKind,
    /// Shots per circuit in shot mode.
    #[arg(long, default_value_t = 1000)]
    pub shots: u64,
    /// Single-qubit depolarizing probability in noisy mode.
    #[arg(long, default_value_t = 0.01)]
    pub p1: f64,
    /// Two-qubit depolarizing probability in noisy mode.
    #[arg(long, default_value_t = 0.2)]
    pub p2: f64,
    /// Bitstrings sampled when extracting the solution.
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    #[arg(long, value_enum, default_value = "simultaneous")]
    pub schedule: ScheduleKind,
    /// Keep the correlation tensor real.
    #[arg(long)]
    pub real_c: bool,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    pub time_budget: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    /// Problem files to benchmark; without them the scaling study runs on
    /// random MaxCut graphs.
    #[arg(long, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "maxcut")]
    pub problem: ProblemKind,
    #[arg(long, value_enum, default_value = "printed")]
    pub encoding: EncodingKind,
    /// Scaling-study configuration file (`key = value` lines).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Graph sizes of the scaling study, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub sa_sweeps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NoiseArgs {
    /// Noise-study configuration file (`key = value` lines).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of qubits N.
    #[arg(long)]
    pub n: Option<usize>,
    /// Subsystem counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<usize>>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub p2: Option<f64>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub c_b: Option<f64>,
    #[arg(long)]
    pub eps_c: Option<f64>,
    /// `random_qubo` and/or `end_zz`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub hamiltonians: Option<Vec<String>>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GradcheckArgs {
    /// MaxCut edge list; a random QUBO on `--n` qubits otherwise.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub rank: usize,
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    #[arg(long, value_enum, default_value = "dense")]
    pub layout: LayoutKind,
    #[arg(long, default_value_t = 2)]
    pub bond: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-5)]
    pub step: f64,
    /// Largest accepted relative error.
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BruteArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
}

/// Reproducibility envelope written next to every result.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub tool_version: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Failure classes and their exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Exit 2.
    Config(String),
    /// Exit 3.
    Parse(String),
    /// Exit 1.
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Parse(_) => 3,
            Failure::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Parse(m) | Failure::Runtime(m) => m,
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Configuration problems map to exit 2, malformed files to exit 3 and
/// everything else to exit 1.
impl From<DvqaError> for Failure {
    fn from(e: DvqaError) -> Self {
        match e {
            DvqaError::InvalidInput(_) | DvqaError::Dimension(_) => Failure::Config(e.to_string()),
            DvqaError::Parse { .. } => Failure::Parse(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn config_err(flag: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::Config(format!("--{flag}: {msg}"))
}

/// Read input files; any failure is an input error.
fn read_input(path: &Path) -> CliResult<(String, InputDigest)> {
    let bytes = fs::read(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Failure::Parse(format!("{}: not valid UTF-8", path.display())))?;
    let digest = InputDigest {
        path: path.display().to_string(),
        sha256: Sha256::digest(&bytes).iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        }),
    };
    Ok((text, digest))
}

enum Problem {
    Maxcut,
    Portfolio(PortfolioInstance),
}

fn load_problem(
    kind: ProblemKind,
    encoding: EncodingKind,
    path: &Path,
) -> CliResult<(Hamiltonian, Problem, InputDigest)> {
    let (_, digest) = read_input(path)?;
    let parse = |e: DvqaError| match e {
        DvqaError::Io(io) => Failure::Parse(format!("{}: {io}", path.display())),
        other => Failure::Parse(other.to_string()),
    };
    match kind {
        ProblemKind::Maxcut => {
            let g = load_graph(path).map_err(parse)?;
            Ok((maxcut_hamiltonian(&g), Problem::Maxcut, digest))
        }
        ProblemKind::Portfolio => {
            let inst = load_portfolio(path).map_err(parse)?;
            let enc = match encoding {
                EncodingKind::Printed => PortfolioEncoding::Printed,
                EncodingKind::Exact => PortfolioEncoding::Exact,
            };
            Ok((portfolio_hamiltonian(&inst, enc), Problem::Portfolio(inst), digest))
        }
    }
}

struct Output {
    dir: PathBuf,
    written: Vec<String>,
}

impl Output {
    fn new(dir: PathBuf) -> CliResult<Self> {
        fs::create_dir_all(&dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
        Ok(Output {
            dir,
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Writes `<prefix>_manifest.json` listing everything written so far.
    fn finish(mut self, prefix: &str, mut manifest: RunManifest) -> CliResult<()> {
        manifest.outputs = std::mem::take(&mut self.written);
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::Runtime(e.to_string()))?;
        self.write(&format!("{prefix}_manifest.json"), &(text + "\n"))
    }
}

fn manifest(command: &str, config: Value, seed: u64, inputs: Vec<InputDigest>) -> RunManifest {
    RunManifest {
        command: command.to_string(),
        config,
        seed,
        inputs,
        outputs: Vec::new(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

fn to_value<T: Serialize>(v: &T) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| Failure::Runtime(e.to_string()))
}

fn json_doc(manifest: &RunManifest, result: Value) -> CliResult<String> {
    let doc = json!({ "manifest": manifest, "result": result });
    serde_json::to_string_pretty(&doc)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Runtime(e.to_string()))
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
    }
}

/// Run a parsed command line.
pub fn execute(cli: &Cli) -> CliResult<()> {
    let dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(config_err("threads", "must be at least 1"));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Failure::Runtime(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Solve(a) => cmd_solve(a, dir),
        Command::Bench(a) => cmd_bench(a, dir, cli.no_timing),
        Command::Noise(a) => cmd_noise(a, dir, cli.no_timing),
        Command::Gradcheck(a) => cmd_gradcheck(a, dir),
        Command::Brute(a) => cmd_brute(a, dir),
    })
}

fn solve_partition(a: &SolveArgs, n: usize) -> CliResult<Partition> {
    if a.rank == 0 {
        return Err(config_err("rank", "must be at least 1"));
    }
    match (a.k, a.width) {
        (Some(k), _) => Partition::uniform(n, k, a.rank).map_err(|e| config_err("k", e)),
        (None, Some(w)) => Partition::blocks(n, w, a.rank).map_err(|e| config_err("width", e)),
        (None, None) => Partition::blocks(n, 6.min(n), a.rank).map_err(|e| config_err("rank", e)),
    }
}

fn solve_config(a: &SolveArgs) -> CliResult<TrainConfig> {
    let mode = match a.mode {
        ModeKind::Exact => EvalMode::Exact,
        ModeKind::Shots => {
            if a.shots == 0 {
                return Err(config_err("shots", "must be at least 1"));
            }
            EvalMode::Shots(a.shots)
        }
        ModeKind::Noisy => EvalMode::Noisy(NoiseModel::new(a.p1, a.p2).map_err(|e| config_err("p1/--p2", e))?),
    };
    let layout = match a.layout {
        LayoutKind::Auto => None,
        LayoutKind::Dense => Some(Layout::Dense),
        LayoutKind::Train => Some(Layout::Train { bond: a.bond }),
    };
    let schedule = match a.schedule {
        ScheduleKind::Simultaneous => UpdateSchedule::Simultaneous,
        ScheduleKind::Alternating => UpdateSchedule::Alternating,
        ScheduleKind::TensorOnly => UpdateSchedule::TensorOnly,
    };
    let tc = TrainConfig {
        iterations: a.iters,
        learning_rate: a.lr,
        depth: a.depth,
        mode,
        seed: a.seed,
        restarts: a.restarts,
        layout,
        bond: a.bond,
        real_c: a.real_c,
        schedule,
        samples: a.samples,
        time_budget: a.time_budget,
        ..TrainConfig::default()
    };
    tc.validate()?;
    Ok(tc)
}

fn reference(h: &Hamiltonian) -> CliResult<Option<f64>> {
    if h.num_qubits() > MAX_BRUTE_FORCE_QUBITS {
        return Ok(None);
    }
    Ok(Some(brute_force(h)?.1))
}

fn cmd_solve(a: &SolveArgs, dir: PathBuf) -> CliResult<()> {
    let (h, problem, digest) = load_problem(a.problem.problem, a.problem.encoding, &a.problem.input)?;
    let part = solve_partition(a, h.num_qubits())?;
    let tc = solve_config(a)?;
    let config = json!({
        "args": to_value(a)?,
        "train": to_value(&tc)?,
        "partition": { "sizes": part.sizes(), "ranks": part.ranks() },
    });
    let man = manifest("solve", config, a.seed, vec![digest]);
    let result = optimize(&h, &part, &tc)?;
    let opt = reference(&h)?;

    let mut out = Output::new(dir)?;
    out.write("solve_result.json", &json_doc(&man, to_value(&result)?)?)?;
    out.write("solve_iterations.csv", &records_csv(&result.records))?;
    out.write("solve_tensor.txt", &write_checkpoint(&result.c_star))?;
    out.finish("solve", man)?;

    println!("best bitstring: {}", result.best_bitstring);
    println!("energy: {}", result.best_energy);
    if let Problem::Portfolio(inst) = &problem {
        println!("portfolio objective: {}", inst.objective(&result.best_bitstring)?);
    }
    println!("final loss: {}", result.final_loss());
    match opt {
        Some(opt) => {
            println!("optimum: {opt}");
            match approximation_ratio(opt, result.best_energy) {
                Ok(r) => println!("ratio: {r}"),
                Err(_) => println!("ratio: undefined (values not both negative)"),
            }
        }
        None => println!("optimum: not enumerated (N > {MAX_BRUTE_FORCE_QUBITS})"),
    }
    if result.timed_out {
        println!("stopped early: time budget exhausted");
    }
    Ok(())
}

fn bench_config(a: &BenchArgs) -> CliResult<(ScalingConfig, Vec<InputDigest>)> {
    let mut digests = Vec::new();
    let mut cfg = match &a.config {
        Some(path) => {
            let (text, d) = read_input(path)?;
            digests.push(d);
            ScalingConfig::from_kv(&text, &path.display().to_string()).map_err(|e| match e {
                DvqaError::Parse { .. } => Failure::Parse(e.to_string()),
                other => config_err("config", other),
            })?
        }
        None => ScalingConfig::default(),
    };
    macro_rules! set {
        ($($flag:ident => $field:ident),*) => {
            $(if let Some(v) = a.$flag.clone() { cfg.$field = v; })*
        };
    }
    set!(sizes => sizes, runs => runs, width => width, rank => rank, depth => depth,
         iters => iterations, lr => learning_rate, sa_sweeps => sa_sweeps, seed => seed);
    cfg.validate()?;
    Ok((cfg, digests))
}

fn mask_bench_times(records: &mut [BenchRecord]) {
    records.iter_mut().for_each(|r| r.wall_time = 0.0);
}

fn summarize(records: &[BenchRecord]) -> String {
    let mut s = String::new();
    let mut seen = Vec::new();
    for r in records {
        if !seen.contains(&(&r.instance, &r.method)) {
            seen.push((&r.instance, &r.method));
        }
    }
    for (inst, method) in seen {
        let ratios: Vec<f64> = records
            .iter()
            .filter(|r| &r.instance == inst && &r.method == method)
            .map(|r| r.ratio)
            .collect();
        let _ = writeln!(s, "{inst} {method}: median ratio {:.4} over {} runs", median(&ratios), ratios.len());
    }
    s
}

fn cmd_bench(a: &BenchArgs, dir: PathBuf, no_timing: bool) -> CliResult<()> {
    let (cfg, mut digests) = bench_config(a)?;
    let mut instances = Vec::new();
    for path in &a.input {
        let (h, _, d) = load_problem(a.problem, a.encoding, path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        instances.push((name, h));
        digests.push(d);
    }
    let config = json!({ "args": to_value(a)?, "study": to_value(&cfg)?, "no_timing": no_timing });
    let man = manifest("bench", config, cfg.seed, digests);
    let mut out = Output::new(dir)?;
    if instances.is_empty() {
        let mut study = run_scaling_study(&cfg)?;
        if no_timing {
            mask_bench_times(&mut study.records);
            for r in &mut study.rows {
                r.time_median = 0.0;
                r.sa_time_median = 0.0;
            }
        }
        out.write("bench.csv", &study.records_csv())?;
        out.write("scaling.csv", &study.rows_csv())?;
        print!("{}", summarize(&study.records));
        if study.rows.len() >= 2 && !no_timing {
            println!("log-log slope of median time vs size: {:.3}", study.time_slope());
        }
    } else {
        let mut records = run_bench(&instances, &cfg)?;
        if no_timing {
            mask_bench_times(&mut records);
        }
        out.write("bench.csv", &bench_csv(&records))?;
        print!("{}", summarize(&records));
    }
    out.finish("bench", man)
}

fn noise_config(a: &NoiseArgs) -> CliResult<(NoiseConfig, Vec<InputDigest>)> {
    let mut digests = Vec::new();
    let mut cfg = match &a.config {
        Some(path) => {
            let (text, d) = read_input(path)?;
            digests.push(d);
            NoiseConfig::from_kv(&text, &path.display().to_string()).map_err(|e| match e {
                DvqaError::Parse { .. } => Failure::Parse(e.to_string()),
                other => config_err("config", other),
            })?
        }
        None => NoiseConfig::default(),
    };
    macro_rules! set {
        ($($flag:ident => $field:ident),*) => {
            $(if let Some(v) = a.$flag.clone() { cfg.$field = v; })*
        };
    }
    set!(n => num_qubits, ks => ks, runs => runs, p1 => p1, p2 => p2, depth => depth,
         iters => iterations, lr => learning_rate, rank => rank, restarts => restarts,
         c_b => c_b, eps_c => eps_c, seed => seed);
    if let Some(names) = &a.hamiltonians {
        cfg.hamiltonians = names
            .iter()
            .map(|s| s.parse::<NoiseHamiltonian>())
            .collect::<Result<_, _>>()
            .map_err(|e| config_err("hamiltonians", e))?;
    }
    cfg.validate()?;
    Ok((cfg, digests))
}

fn cmd_noise(a: &NoiseArgs, dir: PathBuf, no_timing: bool) -> CliResult<()> {
    let (cfg, digests) = noise_config(a)?;
    let config = json!({ "args": to_value(a)?, "study": to_value(&cfg)?, "no_timing": no_timing });
    let man = manifest("noise", config, cfg.seed, digests);
    let mut study = run_noise_study(&cfg)?;
    if no_timing {
        study.runs.iter_mut().for_each(|r| r.wall_time = 0.0);
        study.rows.iter_mut().for_each(|r| r.time_mean = 0.0);
    }
    let mut out = Output::new(dir)?;
    out.write("noise.csv", &study.rows_csv())?;
    out.write("noise_runs.csv", &study.runs_csv())?;
    out.finish("noise", man)?;
    for r in &study.rows {
        println!(
            "{} K={}: mean dH {:.4} (std {:.4}), bound {:.4}, within bound {}/{}",
            r.hamiltonian, r.k, r.delta_mean, r.delta_std, r.bound_iid, r.within_bound, r.runs
        );
    }
    Ok(())
}

fn cmd_gradcheck(a: &GradcheckArgs, dir: PathBuf) -> CliResult<()> {
    let mut digests = Vec::new();
    let h = match &a.input {
        Some(path) => {
            let (h, _, d) = load_problem(ProblemKind::Maxcut, EncodingKind::Printed, path)?;
            digests.push(d);
            h
        }
        None => random_qubo(a.n, a.seed).map_err(|e| config_err("n", e))?,
    };
    if a.rank == 0 {
        return Err(config_err("rank", "must be at least 1"));
    }
    let part = Partition::uniform(h.num_qubits(), a.k, a.rank).map_err(|e| config_err("k", e))?;
    let layout = match a.layout {
        LayoutKind::Auto => Layout::auto(part.ranks(), a.bond),
        LayoutKind::Dense => Layout::Dense,
        LayoutKind::Train => Layout::Train { bond: a.bond },
    };
    let obj = Objective::new(&h, &part, a.depth)?;
    let theta = init_theta(&obj, crate::engine::stream_seed(&[a.seed, 1]));
    let c = CorrelationTensor::init_random(part.ranks(), layout, crate::engine::stream_seed(&[a.seed, 2]))?;
    let chk = finite_difference_check(&obj, &theta, &c, a.step)?;

    let man = manifest("gradcheck", to_value(a)?, a.seed, digests);
    let mut out = Output::new(dir)?;
    out.write("gradcheck_result.json", &json_doc(&man, to_value(&chk)?)?)?;
    out.finish("gradcheck", man)?;
    println!("theta relative error: {:e}", chk.theta_error);
    println!("C relative error: {:e}", chk.c_error);
    println!("max relative error: {:e}", chk.max_error());
    if !(chk.max_error() <= a.tolerance) {
        return Err(Failure::Runtime(format!(
            "gradient error {:e} exceeds tolerance {:e}",
            chk.max_error(),
            a.tolerance
        )));
    }
    Ok(())
}

fn cmd_brute(a: &BruteArgs, dir: PathBuf) -> CliResult<()> {
    let (h, problem, digest) = load_problem(a.problem.problem, a.problem.encoding, &a.problem.input)?;
    let man = manifest("brute", to_value(a)?, 0, vec![digest]);
    let (bits, energy) = brute_force(&h)?;
    let mut result = json!({ "bitstring": bits.to_string(), "energy": energy });
    let mut out = Output::new(dir)?;
    println!("optimum bitstring: {bits}");
    println!("energy: {energy}");
    if let Problem::Portfolio(inst) = &problem {
        let obj = inst.objective(&bits)?;
        result["portfolio_objective"] = json!(obj);
        println!("portfolio objective: {obj}");
    }
    out.write("brute_result.json", &json_doc(&man, result)?)?;
    out.finish("brute", man)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(Failure::from(DvqaError::InvalidInput("x".into())).exit_code(), 2);
        let p = DvqaError::Parse {
            path: "f".into(),
            line: 3,
            message: "bad".into(),
        };
        assert_eq!(Failure::from(p).exit_code(), 3);
        assert_eq!(Failure::from(DvqaError::Numerical("x".into())).exit_code(), 1);
    }

    #[test]
    fn help_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
