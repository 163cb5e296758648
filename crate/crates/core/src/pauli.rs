//! Weighted Pauli-string Hamiltonians and their split into subsystem factors.
//!
//! A Hamiltonian is stored sparsely as `offset + Σ_i w_i P_i` with each `P_i`
//! a string over `{I, X, Y, Z}`. Qubit `0` is the leftmost letter and the most
//! significant bit of every basis index. A bit `x` maps to the spin
//! `z = 1 - 2x`, so `x = 0` is the `+1` eigenstate of `Z`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{dim, invalid, DvqaError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliOp {
    I,
    X,
    Y,
    Z,
}

impl PauliOp {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(PauliOp::I),
            'X' => Some(PauliOp::X),
            'Y' => Some(PauliOp::Y),
            'Z' => Some(PauliOp::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            PauliOp::I => 'I',
            PauliOp::X => 'X',
            PauliOp::Y => 'Y',
            PauliOp::Z => 'Z',
        }
    }

    pub fn is_diagonal(self) -> bool {
        matches!(self, PauliOp::I | PauliOp::Z)
    }
}

/// Tensor product of single-qubit Pauli operators, one letter per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliString(Vec<PauliOp>);

impl PauliString {
    pub fn new(ops: Vec<PauliOp>) -> Self {
        PauliString(ops)
    }

    pub fn identity(len: usize) -> Self {
        PauliString(vec![PauliOp::I; len])
    }

    /// String of length `len` with `Z` at each listed position.
    pub fn z_on(len: usize, positions: &[usize]) -> Self {
        let mut ops = vec![PauliOp::I; len];
        for &p in positions {
            ops[p] = PauliOp::Z;
        }
        PauliString(ops)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ops(&self) -> &[PauliOp] {
        &self.0
    }

    /// Number of non-identity letters.
    pub fn support(&self) -> usize {
        self.0.iter().filter(|&&op| op != PauliOp::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&op| op == PauliOp::I)
    }

    pub fn is_diagonal(&self) -> bool {
        self.0.iter().all(|op| op.is_diagonal())
    }

    /// Positions carrying a `Z`.
    pub fn z_positions(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &op)| op == PauliOp::Z)
            .map(|(q, _)| q)
            .collect()
    }

    pub fn slice(&self, start: usize, len: usize) -> PauliString {
        PauliString(self.0[start..start + len].to_vec())
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a PauliString>) -> PauliString {
        PauliString(parts.into_iter().flat_map(|p| p.0.iter().copied()).collect())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for op in &self.0 {
            write!(f, "{}", op.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = DvqaError;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                PauliOp::from_char(c).ok_or_else(|| invalid(format!("invalid Pauli letter {c:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliString)
    }
}

/// Classical assignment of `N` binary variables; position 0 is qubit 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bitstring(Vec<bool>);

impl Bitstring {
    pub fn new(bits: Vec<bool>) -> Self {
        Bitstring(bits)
    }

    pub fn zeros(len: usize) -> Self {
        Bitstring(vec![false; len])
    }

    /// Bits of `value` over `len` positions, most significant bit first.
    pub fn from_index(value: u64, len: usize) -> Self {
        Bitstring((0..len).map(|q| (value >> (len - 1 - q)) & 1 == 1).collect())
    }

    pub fn to_index(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn bits_mut(&mut self) -> &mut [bool] {
        &mut self.0
    }

    /// Spin value `z = 1 - 2x` of position `q`.
    pub fn spin(&self, q: usize) -> f64 {
        if self.0[q] {
            -1.0
        } else {
            1.0
        }
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bitstring {
    type Err = DvqaError;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(invalid(format!("invalid bit {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Bitstring)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub weight: f64,
    pub string: PauliString,
}

/// `offset + Σ_i w_i P_i` over `num_qubits` qubits.
///
/// Construction merges duplicate strings (first occurrence fixes the order)
/// and drops terms whose merged weight is exactly zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    num_qubits: usize,
    terms: Vec<Term>,
    offset: f64,
    locality: usize,
}

impl Hamiltonian {
    pub fn new(
        num_qubits: usize,
        raw_terms: impl IntoIterator<Item = (f64, PauliString)>,
        offset: f64,
    ) -> Result<Self> {
        if num_qubits == 0 {
            return Err(invalid("num_qubits must be positive"));
        }
        if !offset.is_finite() {
            return Err(invalid("offset must be finite"));
        }
        let mut index: HashMap<PauliString, usize> = HashMap::new();
        let mut merged: Vec<Term> = Vec::new();
        for (weight, string) in raw_terms {
            if string.len() != num_qubits {
                return Err(invalid(format!(
                    "length mismatch: term {string} has {} letters, expected {num_qubits}",
                    string.len()
                )));
            }
            if !weight.is_finite() {
                return Err(invalid(format!("non-finite weight for term {string}")));
            }
            match index.get(&string) {
                Some(&at) => merged[at].weight += weight,
                None => {
                    index.insert(string.clone(), merged.len());
                    merged.push(Term { weight, string });
                }
            }
        }
        merged.retain(|t| t.weight != 0.0);
        let locality = merged.iter().map(|t| t.string.support()).max().unwrap_or(0);
        Ok(Hamiltonian {
            num_qubits,
            terms: merged,
            offset,
            locality,
        })
    }

    /// Convenience constructor from `(weight, "IZZI")` pairs.
    pub fn from_strs(num_qubits: usize, raw: &[(f64, &str)], offset: f64) -> Result<Self> {
        let terms = raw
            .iter()
            .map(|&(w, s)| s.parse::<PauliString>().map(|p| (w, p)))
            .collect::<Result<Vec<_>>>()?;
        Hamiltonian::new(num_qubits, terms, offset)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Largest support over all terms (0 for an empty or identity-only Hamiltonian).
    pub fn locality(&self) -> usize {
        self.locality
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(|t| t.string.is_diagonal())
    }

    /// `‖w‖₁`, excluding the offset.
    pub fn weight_l1(&self) -> f64 {
        self.terms.iter().map(|t| t.weight.abs()).sum()
    }

    pub fn diagonal(&self) -> Result<DiagonalForm> {
        DiagonalForm::new(self)
    }

    /// `offset + Σ_i w_i ∏_{j ∈ Z(i)} z_j` with `z = 1 - 2x`.
    pub fn classical_energy(&self, x: &Bitstring) -> Result<f64> {
        if !self.is_diagonal() {
            return Err(DvqaError::NotDiagonal);
        }
        if x.len() != self.num_qubits {
            return Err(dim(format!(
                "bitstring has {} bits, Hamiltonian has {} qubits",
                x.len(),
                self.num_qubits
            )));
        }
        let mut energy = self.offset;
        for term in &self.terms {
            let parity = term
                .string
                .ops()
                .iter()
                .zip(x.bits())
                .filter(|(&op, &b)| op == PauliOp::Z && b)
                .count();
            energy += if parity % 2 == 0 { term.weight } else { -term.weight };
        }
        Ok(energy)
    }

    /// Split every term into per-subsystem factors along contiguous blocks.
    pub fn partition_terms(&self, part: &Partition) -> Result<Vec<PartitionedTerm>> {
        if part.total_qubits() != self.num_qubits {
            return Err(dim(format!(
                "partition covers {} qubits, Hamiltonian has {}",
                part.total_qubits(),
                self.num_qubits
            )));
        }
        let offsets = part.offsets();
        Ok(self
            .terms
            .iter()
            .map(|t| PartitionedTerm {
                weight: t.weight,
                factors: part
                    .sizes()
                    .iter()
                    .zip(&offsets)
                    .map(|(&n, &start)| t.string.slice(start, n))
                    .collect(),
            })
            .collect())
    }

    /// Line-oriented text: a header `num_qubits<TAB>offset`, then one
    /// `weight<TAB>string` line per term. Floats use the shortest
    /// representation that parses back to the same value.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\t{}\n", self.num_qubits, self.offset);
        for t in &self.terms {
            out.push_str(&format!("{}\t{}\n", t.weight, t.string));
        }
        out
    }

    pub fn from_text(text: &str, path: &str) -> Result<Self> {
        let perr = |line: usize, message: String| DvqaError::Parse {
            path: path.to_string(),
            line,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or_else(|| perr(1, "missing header".into()))?;
        let mut fields = header.split('\t');
        let num_qubits: usize = fields
            .next()
            .and_then(|f| f.trim().parse().ok())
            .ok_or_else(|| perr(hline, "expected qubit count in header".into()))?;
        let offset: f64 = fields
            .next()
            .and_then(|f| f.trim().parse().ok())
            .ok_or_else(|| perr(hline, "expected offset in header".into()))?;
        let mut terms = Vec::new();
        for (lineno, line) in lines {
            let (w, s) = line
                .split_once('\t')
                .ok_or_else(|| perr(lineno, "expected weight<TAB>string".into()))?;
            let weight: f64 = w
                .trim()
                .parse()
                .map_err(|_| perr(lineno, format!("bad weight {w:?}")))?;
            let string: PauliString = s.trim().parse().map_err(|e: DvqaError| perr(lineno, e.to_string()))?;
            terms.push((weight, string));
        }
        Hamiltonian::new(num_qubits, terms, offset).map_err(|e| perr(hline, e.to_string()))
    }
}

/// Diagonal Hamiltonian compiled to sparse `Z`-supports for fast scoring.
#[derive(Debug, Clone)]
pub struct DiagonalForm {
    num_qubits: usize,
    offset: f64,
    weights: Vec<f64>,
    supports: Vec<Vec<usize>>,
    /// Terms touching each qubit.
    incidence: Vec<Vec<usize>>,
}

impl DiagonalForm {
    fn new(h: &Hamiltonian) -> Result<Self> {
        if !h.is_diagonal() {
            return Err(DvqaError::NotDiagonal);
        }
        let supports: Vec<Vec<usize>> = h.terms.iter().map(|t| t.string.z_positions()).collect();
        let mut incidence = vec![Vec::new(); h.num_qubits];
        for (i, s) in supports.iter().enumerate() {
            for &q in s {
                incidence[q].push(i);
            }
        }
        Ok(DiagonalForm {
            num_qubits: h.num_qubits,
            offset: h.offset,
            weights: h.terms.iter().map(|t| t.weight).collect(),
            supports,
            incidence,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn energy(&self, bits: &[bool]) -> f64 {
        self.offset
            + self
                .weights
                .iter()
                .zip(&self.supports)
                .map(|(&w, s)| if s.iter().filter(|&&q| bits[q]).count() % 2 == 0 { w } else { -w })
                .sum::<f64>()
    }

    /// Energy change from flipping bit `q`.
    pub fn flip_delta(&self, bits: &[bool], q: usize) -> f64 {
        self.incidence[q]
            .iter()
            .map(|&i| {
                let odd = self.supports[i].iter().filter(|&&j| bits[j]).count() % 2 == 1;
                let value = if odd { -self.weights[i] } else { self.weights[i] };
                -2.0 * value
            })
            .sum()
    }
}

/// Ordered contiguous subsystem blocks with one rank per block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    sizes: Vec<usize>,
    ranks: Vec<usize>,
}

impl Partition {
    pub fn new(sizes: Vec<usize>, ranks: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(invalid("partition needs at least one subsystem"));
        }
        if sizes.len() != ranks.len() {
            return Err(invalid(format!(
                "{} subsystem sizes but {} ranks",
                sizes.len(),
                ranks.len()
            )));
        }
        for (k, (&n, &r)) in sizes.iter().zip(&ranks).enumerate() {
            if n == 0 {
                return Err(invalid(format!("subsystem {k} has zero qubits")));
            }
            if r == 0 {
                return Err(invalid(format!("subsystem {k} has rank 0")));
            }
            if n < 63 && r > (1usize << n) {
                return Err(invalid(format!(
                    "subsystem {k}: rank {r} exceeds dimension 2^{n}"
                )));
            }
        }
        Ok(Partition { sizes, ranks })
    }

    /// `K` equal blocks; `num_qubits` must be divisible by `k`.
    pub fn uniform(num_qubits: usize, k: usize, rank: usize) -> Result<Self> {
        if k == 0 || !num_qubits.is_multiple_of(k) {
            return Err(invalid(format!("K = {k} does not divide N = {num_qubits}")));
        }
        Partition::new(vec![num_qubits / k; k], vec![rank; k])
    }

    /// Blocks of `width` qubits, the last block taking the remainder.
    pub fn blocks(num_qubits: usize, width: usize, rank: usize) -> Result<Self> {
        if width == 0 || num_qubits == 0 {
            return Err(invalid("block width and qubit count must be positive"));
        }
        let mut sizes = vec![width; num_qubits / width];
        if !num_qubits.is_multiple_of(width) {
            sizes.push(num_qubits % width);
        }
        let ranks = sizes.iter().map(|&n| rank.min(1usize << n.min(62))).collect();
        Partition::new(sizes, ranks)
    }

    /// Reject partitions whose widest block exceeds a hardware qubit cap.
    pub fn with_cap(self, max_width: usize) -> Result<Self> {
        if self.max_width() > max_width {
            return Err(invalid(format!(
                "subsystem width {} exceeds qubit cap {max_width}",
                self.max_width()
            )));
        }
        Ok(self)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn num_subsystems(&self) -> usize {
        self.sizes.len()
    }

    pub fn total_qubits(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// `d`, the widest subsystem.
    pub fn max_width(&self) -> usize {
        *self.sizes.iter().max().unwrap()
    }

    pub fn max_rank(&self) -> usize {
        *self.ranks.iter().max().unwrap()
    }

    /// First global qubit of each block.
    pub fn offsets(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .scan(0, |acc, &n| {
                let start = *acc;
                *acc += n;
                Some(start)
            })
            .collect()
    }
}

/// One Hamiltonian term split into `K` local factors.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedTerm {
    pub weight: f64,
    pub factors: Vec<PauliString>,
}

impl PartitionedTerm {
    /// Subsystems whose factor is not the identity.
    pub fn active_subsystems(&self) -> impl Iterator<Item = usize> + '_ {
        self.factors
            .iter()
            .enumerate()
            .filter(|(_, f)| !f.is_identity())
            .map(|(k, _)| k)
    }
}
