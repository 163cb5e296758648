//! MaxCut and mean-variance portfolio instances and their Ising Hamiltonians.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{dim, invalid, DvqaError, Result};
use crate::pauli::{Bitstring, Hamiltonian, PauliString};

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Undirected weighted graph; edges are stored with `u < v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<Edge>,
}

impl Graph {
    pub fn new(num_nodes: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        if num_nodes == 0 {
            return Err(invalid("graph needs at least one node"));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (u, v, w) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(invalid(format!("edge ({u},{v}) out of range for {num_nodes} nodes")));
            }
            if u == v {
                return Err(invalid(format!("self-loop on node {u}")));
            }
            if !w.is_finite() {
                return Err(invalid(format!("non-finite weight on edge ({u},{v})")));
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            if !seen.insert((a, b)) {
                return Err(invalid(format!("duplicate edge ({a},{b})")));
            }
            out.push(Edge { u: a, v: b, weight: w });
        }
        Ok(Graph {
            num_nodes,
            edges: out,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Total weight of edges whose endpoints land on different sides.
    pub fn cut_value(&self, x: &Bitstring) -> f64 {
        self.edges
            .iter()
            .filter(|e| x.bits()[e.u] != x.bits()[e.v])
            .map(|e| e.weight)
            .sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.num_nodes);
        for e in &self.edges {
            out.push_str(&format!("{} {} {}\n", e.u, e.v, e.weight));
        }
        out
    }

    pub fn from_text(text: &str, path: &str) -> Result<Self> {
        let perr = |line: usize, message: String| DvqaError::Parse {
            path: path.to_string(),
            line,
            message,
        };
        let mut lines = numbered_lines(text);
        let (hline, header) = lines.next().ok_or_else(|| perr(1, "missing node count".into()))?;
        let num_nodes: usize = header
            .parse()
            .map_err(|_| perr(hline, format!("bad node count {header:?}")))?;
        let mut edges = Vec::new();
        for (lineno, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(perr(lineno, format!("expected `u v w`, got {line:?}")));
            }
            let u = fields[0]
                .parse()
                .map_err(|_| perr(lineno, format!("bad node index {:?}", fields[0])))?;
            let v = fields[1]
                .parse()
                .map_err(|_| perr(lineno, format!("bad node index {:?}", fields[1])))?;
            let w = fields[2]
                .parse()
                .map_err(|_| perr(lineno, format!("bad weight {:?}", fields[2])))?;
            edges.push((u, v, w, lineno));
        }
        let mut checked = Vec::with_capacity(edges.len());
        let mut seen = HashSet::new();
        for (u, v, w, lineno) in edges {
            let key = if u < v { (u, v) } else { (v, u) };
            if u >= num_nodes || v >= num_nodes || u == v || !seen.insert(key) {
                return Err(perr(lineno, format!("invalid edge ({u},{v})")));
            }
            checked.push((u, v, w));
        }
        Graph::new(num_nodes, checked).map_err(|e| perr(hline, e.to_string()))
    }
}

/// Mean-variance portfolio: returns `r`, covariance `V`, risk tolerance in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioInstance {
    returns: Vec<f64>,
    covariance: Vec<Vec<f64>>,
    risk_tolerance: f64,
}

impl PortfolioInstance {
    pub fn new(returns: Vec<f64>, covariance: Vec<Vec<f64>>, risk_tolerance: f64) -> Result<Self> {
        let n = returns.len();
        if n == 0 {
            return Err(invalid("portfolio needs at least one asset"));
        }
        if covariance.len() != n || covariance.iter().any(|row| row.len() != n) {
            return Err(dim(format!("covariance must be {n}x{n}")));
        }
        if !(0.0..=1.0).contains(&risk_tolerance) {
            return Err(invalid(format!("risk tolerance {risk_tolerance} outside [0, 1]")));
        }
        if returns.iter().chain(covariance.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(invalid("non-finite portfolio data"));
        }
        for i in 0..n {
            for j in 0..i {
                if (covariance[i][j] - covariance[j][i]).abs() > SYMMETRY_TOL {
                    return Err(invalid(format!(
                        "covariance not symmetric at ({i},{j}): {} vs {}",
                        covariance[i][j], covariance[j][i]
                    )));
                }
            }
        }
        Ok(PortfolioInstance {
            returns,
            covariance,
            risk_tolerance,
        })
    }

    pub fn num_assets(&self) -> usize {
        self.returns.len()
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn covariance(&self) -> &[Vec<f64>] {
        &self.covariance
    }

    pub fn risk_tolerance(&self) -> f64 {
        self.risk_tolerance
    }

    /// `λ·xᵀVx − (1−λ)·rᵀx` for a selection vector `x`.
    pub fn objective(&self, x: &Bitstring) -> Result<f64> {
        let n = self.num_assets();
        if x.len() != n {
            return Err(dim(format!("selection has {} bits, portfolio has {n} assets", x.len())));
        }
        let lam = self.risk_tolerance;
        let sel: Vec<usize> = (0..n).filter(|&i| x.bits()[i]).collect();
        let risk: f64 = sel
            .iter()
            .flat_map(|&i| sel.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.covariance[i][j])
            .sum();
        let ret: f64 = sel.iter().map(|&i| self.returns[i]).sum();
        Ok(lam * risk - (1.0 - lam) * ret)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.num_assets(), self.risk_tolerance);
        out.push_str(&join(&self.returns));
        out.push('\n');
        for row in &self.covariance {
            out.push_str(&join(row));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str, path: &str) -> Result<Self> {
        let perr = |line: usize, message: String| DvqaError::Parse {
            path: path.to_string(),
            line,
            message,
        };
        let mut lines = numbered_lines(text);
        let (hline, header) = lines.next().ok_or_else(|| perr(1, "missing header".into()))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 2 {
            return Err(perr(hline, "expected `n lambda`".into()));
        }
        let n: usize = head[0]
            .parse()
            .map_err(|_| perr(hline, format!("bad asset count {:?}", head[0])))?;
        let lam: f64 = head[1]
            .parse()
            .map_err(|_| perr(hline, format!("bad lambda {:?}", head[1])))?;
        let mut read_row = |what: &str| -> Result<Vec<f64>> {
            let (lineno, line) = lines
                .next()
                .ok_or_else(|| perr(0, format!("unexpected end of file, expected {what}")))?;
            let row = line
                .split_whitespace()
                .map(|f| f.parse::<f64>().map_err(|_| perr(lineno, format!("bad number {f:?}"))))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != n {
                return Err(perr(lineno, format!("expected {n} values, got {}", row.len())));
            }
            Ok(row)
        };
        let returns = read_row("returns")?;
        let covariance = (0..n)
            .map(|i| read_row(&format!("covariance row {i}")))
            .collect::<Result<Vec<_>>>()?;
        PortfolioInstance::new(returns, covariance, lam).map_err(|e| perr(hline, e.to_string()))
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Per edge: `(w/2)·Z_uZ_v` plus `−w/2` in the offset, so the energy of a
/// basis state is minus its cut value.
pub fn maxcut_hamiltonian(g: &Graph) -> Hamiltonian {
    let n = g.num_nodes();
    let offset = -g.edges().iter().map(|e| e.weight / 2.0).sum::<f64>();
    let terms = g
        .edges()
        .iter()
        .map(|e| (e.weight / 2.0, PauliString::z_on(n, &[e.u, e.v])));
    Hamiltonian::new(n, terms, offset).expect("graph validation guarantees a valid Hamiltonian")
}

/// How the portfolio objective is turned into Ising coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PortfolioEncoding {
    /// Coefficients as commonly printed:
    /// `h_i = ½[(1−λ)r_i − λΣ_j V_ij + (λ/2)V_ii]`, `J_ij = (λ/4)V_ij`,
    /// `C = (λ/4)Σ_ij V_ij − ((1−λ)/2)Σ_i r_i`.
    ///
    /// Basis-state energies equal `objective(x) − (λ/2)·Σ_i V_ii x_i`.
    #[default]
    Printed,
    /// Exact expansion of `λxᵀVx − (1−λ)rᵀx` under `x = (1−z)/2`; basis-state
    /// energies equal the objective.
    Exact,
}

pub fn portfolio_hamiltonian(inst: &PortfolioInstance, encoding: PortfolioEncoding) -> Hamiltonian {
    let n = inst.num_assets();
    let lam = inst.risk_tolerance();
    let r = inst.returns();
    let v = inst.covariance();
    let mut terms = Vec::with_capacity(n + n * (n - 1) / 2);
    for i in 0..n {
        let row_sum: f64 = v[i].iter().sum();
        let diag = match encoding {
            PortfolioEncoding::Printed => lam / 2.0 * v[i][i],
            PortfolioEncoding::Exact => 0.0,
        };
        let h = 0.5 * ((1.0 - lam) * r[i] - lam * row_sum + diag);
        terms.push((h, PauliString::z_on(n, &[i])));
    }
    // The sum over ordered pairs i ≠ j visits each unordered pair twice.
    for i in 0..n {
        for j in (i + 1)..n {
            let jij = lam / 4.0 * v[i][j] + lam / 4.0 * v[j][i];
            terms.push((jij, PauliString::z_on(n, &[i, j])));
        }
    }
    let total_v: f64 = v.iter().flatten().sum();
    let total_r: f64 = r.iter().sum();
    let mut offset = lam / 4.0 * total_v - (1.0 - lam) / 2.0 * total_r;
    if encoding == PortfolioEncoding::Exact {
        offset += lam / 4.0 * (0..n).map(|i| v[i][i]).sum::<f64>();
    }
    Hamiltonian::new(n, terms, offset).expect("validated instance yields finite coefficients")
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    Graph::from_text(&text, &path.display().to_string())
}

pub fn load_portfolio(path: impl AsRef<Path>) -> Result<PortfolioInstance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    PortfolioInstance::from_text(&text, &path.display().to_string())
}

/// Risk tolerance used by [`synth_portfolio`].
pub const SYNTH_RISK_TOLERANCE: f64 = 0.5;

/// Returns uniform in `[−1, 1]`, covariance `A·Aᵀ` with `A_ij ~ N(0, 1/n)`.
pub fn synth_portfolio(n: usize, seed: u64) -> Result<PortfolioInstance> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let returns: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let scale = 1.0 / (n as f64).sqrt();
    let a: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let mut cov = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = a[i].iter().zip(&a[j]).map(|(x, y)| x * y).sum();
            cov[i][j] = s;
            cov[j][i] = s;
        }
    }
    PortfolioInstance::new(returns, cov, SYNTH_RISK_TOLERANCE)
}

/// Erdős–Rényi graph with weights in `(0, 1]`; at least one edge when `n ≥ 2`.
pub fn synth_graph(n: usize, density: f64, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(invalid(format!("density {density} outside (0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < density {
                edges.push((u, v, 1.0 - rng.random::<f64>()));
            }
        }
    }
    if edges.is_empty() && n >= 2 {
        let u = rng.random_range(0..n - 1);
        let v = rng.random_range(u + 1..n);
        edges.push((u, v, 1.0 - rng.random::<f64>()));
    }
    Graph::new(n, edges)
}

/// Dense random Ising QUBO: `h_i, J_ij ~ U[−1, 1]`, zero offset.
pub fn random_qubo(n: usize, seed: u64) -> Result<Hamiltonian> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::new();
    for i in 0..n {
        terms.push((rng.random_range(-1.0..=1.0), PauliString::z_on(n, &[i])));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            terms.push((rng.random_range(-1.0..=1.0), PauliString::z_on(n, &[i, j])));
        }
    }
    Hamiltonian::new(n, terms, 0.0)
}
