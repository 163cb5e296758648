//! Trainable normalized correlation tensor `C` and its contraction with the
//! subsystem operators.
//!
//! The objective of one term is `⟨C| ⊗_k A_k |C⟩` where `A_k` is the
//! operator of subsystem `k` (identity on subsystems the term does not
//! touch). `C` is stored either densely (row-major, subsystem 0 slowest) or
//! as a tensor train whose cores `G_k[a][α][b]` have bond dimensions
//! `m_{k−1} × R_k × m_k` with `m_0 = m_K = 1`.
//!
//! All gradients use the real-coordinate convention: for a complex parameter
//! `z = x + iy` the returned value is `∂f/∂x + i·∂f/∂y`.

mod checkpoint;
mod train;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{dim, invalid, DvqaError, Result};

pub use checkpoint::{read_checkpoint, write_checkpoint};

/// Largest element count `to_dense` will materialize.
pub const MAX_DENSE_ELEMENTS: usize = 1 << 20;

/// Dense is chosen automatically up to this many elements.
pub const AUTO_DENSE_LIMIT: usize = 4096;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layout {
    Dense,
    /// Tensor train with internal bond dimension at most `bond`.
    Train { bond: usize },
}

impl Layout {
    /// Dense when `Π R_k ≤ 4096`, otherwise a train with bond `bond`.
    pub fn auto(ranks: &[usize], bond: usize) -> Layout {
        match dense_size(ranks) {
            Some(n) if n <= AUTO_DENSE_LIMIT => Layout::Dense,
            _ => Layout::Train { bond },
        }
    }
}

fn dense_size(ranks: &[usize]) -> Option<usize> {
    ranks.iter().try_fold(1usize, |acc, &r| acc.checked_mul(r))
}

/// Operator on one subsystem: row-major `A[β][α]` of size `R_k × R_k`.
#[derive(Debug, Clone, Copy)]
pub struct LocalOp<'a> {
    pub subsystem: usize,
    pub matrix: &'a [Complex64],
}

/// `weight · ⊗_k A_k` with identities on every subsystem not listed.
#[derive(Debug, Clone)]
pub struct OperatorTerm<'a> {
    pub weight: f64,
    pub legs: Vec<LocalOp<'a>>,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Dense,
    /// `bonds[k]` is the bond between core `k−1` and core `k`; length `K + 1`.
    Train { bonds: Vec<usize>, offsets: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTensor {
    ranks: Vec<usize>,
    repr: Repr,
    data: Vec<Complex64>,
}

/// Outcome of a contraction: real objective plus the discarded imaginary part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contraction {
    pub value: f64,
    pub imag: f64,
}

/// Tolerance on the imaginary residue of a contraction.
pub const IMAG_TOL: f64 = 1e-9;

impl CorrelationTensor {
    /// Standard-normal real and imaginary parts, then renormalized.
    pub fn init_random(ranks: &[usize], layout: Layout, seed: u64) -> Result<Self> {
        let mut c = Self::zeros(ranks, layout)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for z in c.data.iter_mut() {
            *z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
        c.renormalize()?;
        Ok(c)
    }

    /// All-zero tensor of the given shape (not normalized).
    pub fn zeros(ranks: &[usize], layout: Layout) -> Result<Self> {
        if ranks.is_empty() || ranks.contains(&0) {
            return Err(invalid("ranks must be non-empty and positive"));
        }
        match layout {
            Layout::Dense => {
                let n = dense_size(ranks)
                    .filter(|&n| n <= MAX_DENSE_ELEMENTS)
                    .ok_or_else(|| DvqaError::TooLarge("dense tensor exceeds 2^20 elements".into()))?;
                Ok(CorrelationTensor {
                    ranks: ranks.to_vec(),
                    repr: Repr::Dense,
                    data: vec![ZERO; n],
                })
            }
            Layout::Train { bond } => {
                if bond == 0 {
                    return Err(invalid("bond dimension must be at least 1"));
                }
                let bonds = train::bond_dims(ranks, bond);
                let (offsets, total) = train::core_offsets(ranks, &bonds);
                Ok(CorrelationTensor {
                    ranks: ranks.to_vec(),
                    repr: Repr::Train { bonds, offsets },
                    data: vec![ZERO; total],
                })
            }
        }
    }

    pub fn from_dense(ranks: &[usize], data: Vec<Complex64>) -> Result<Self> {
        let mut c = Self::zeros(ranks, Layout::Dense)?;
        if data.len() != c.data.len() {
            return Err(dim(format!("expected {} entries, got {}", c.data.len(), data.len())));
        }
        c.data = data;
        Ok(c)
    }

    /// Build a train from explicit bonds (`bonds[0] = bonds[K] = 1`) and
    /// concatenated cores.
    pub fn from_train(ranks: &[usize], bonds: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        if bonds.len() != ranks.len() + 1 || bonds[0] != 1 || *bonds.last().unwrap() != 1 || bonds.contains(&0) {
            return Err(dim("bonds must have length K+1, start and end with 1"));
        }
        let (offsets, total) = train::core_offsets(ranks, &bonds);
        if data.len() != total {
            return Err(dim(format!("expected {total} core entries, got {}", data.len())));
        }
        Ok(CorrelationTensor {
            ranks: ranks.to_vec(),
            repr: Repr::Train { bonds, offsets },
            data,
        })
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn layout(&self) -> Layout {
        match &self.repr {
            Repr::Dense => Layout::Dense,
            Repr::Train { bonds, .. } => Layout::Train {
                bond: bonds.iter().copied().max().unwrap_or(1),
            },
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.repr, Repr::Dense)
    }

    pub fn bonds(&self) -> Option<&[usize]> {
        match &self.repr {
            Repr::Dense => None,
            Repr::Train { bonds, .. } => Some(bonds),
        }
    }

    /// Trainable parameters (dense entries or concatenated cores).
    pub fn params(&self) -> &[Complex64] {
        &self.data
    }

    pub fn params_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Element count `𝒟`.
    pub fn num_elements(&self) -> usize {
        self.data.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        match &self.repr {
            Repr::Dense => self.data.iter().map(|z| z.norm_sqr()).sum(),
            Repr::Train { .. } => self.train_view().norm_sqr(),
        }
    }

    /// Rescale to unit norm.
    pub fn renormalize(&mut self) -> Result<()> {
        let n2 = self.norm_sqr();
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(DvqaError::Numerical(format!("cannot renormalize tensor with squared norm {n2}")));
        }
        match &self.repr {
            Repr::Dense => {
                let s = 1.0 / n2.sqrt();
                self.data.iter_mut().for_each(|z| *z *= s);
            }
            Repr::Train { .. } => {
                // Spread the scale evenly over the cores.
                let k = self.ranks.len() as f64;
                let s = n2.powf(-0.5 / k);
                self.data.iter_mut().for_each(|z| *z *= s);
            }
        }
        Ok(())
    }

    pub fn to_dense(&self) -> Result<CorrelationTensor> {
        match &self.repr {
            Repr::Dense => Ok(self.clone()),
            Repr::Train { .. } => {
                let n = dense_size(&self.ranks)
                    .filter(|&n| n <= MAX_DENSE_ELEMENTS)
                    .ok_or_else(|| DvqaError::TooLarge("dense expansion exceeds 2^20 elements".into()))?;
                let data = self.train_view().expand(n);
                CorrelationTensor::from_dense(&self.ranks, data)
            }
        }
    }

    /// Dense amplitudes (expanding a train if necessary).
    pub fn dense_amplitudes(&self) -> Result<Vec<Complex64>> {
        Ok(self.to_dense()?.data)
    }

    /// `Σ_α |C_α|` of the dense expansion.
    pub fn l1_norm(&self) -> Result<f64> {
        Ok(self.to_dense()?.data.iter().map(|z| z.norm()).sum())
    }

    /// Drop imaginary parts (real-only ablation) and renormalize.
    pub fn make_real(&mut self) -> Result<()> {
        self.data.iter_mut().for_each(|z| z.im = 0.0);
        self.renormalize()
    }

    fn check_legs(&self, legs: &[LocalOp<'_>]) -> Result<()> {
        for leg in legs {
            let r = *self
                .ranks
                .get(leg.subsystem)
                .ok_or_else(|| dim(format!("subsystem {} out of range", leg.subsystem)))?;
            if leg.matrix.len() != r * r {
                return Err(dim(format!(
                    "operator on subsystem {} has {} entries, rank {r} needs {}",
                    leg.subsystem,
                    leg.matrix.len(),
                    r * r
                )));
            }
        }
        Ok(())
    }

    /// `⟨C| ⊗ A |C⟩` for one term (weight not applied).
    pub fn expectation(&self, legs: &[LocalOp<'_>]) -> Result<Complex64> {
        self.check_legs(legs)?;
        Ok(match &self.repr {
            Repr::Dense => {
                let y = dense_apply(&self.ranks, &self.data, legs);
                self.data.iter().zip(&y).map(|(c, v)| c.conj() * v).sum()
            }
            Repr::Train { .. } => self.train_view().expectation(legs),
        })
    }

    /// Environment `E` of leg `g` such that the term expectation equals
    /// `Σ_{β,α} E[β][α]·A_g[β][α]`; `legs` may or may not contain `g`
    /// (its operator is ignored).
    pub fn environment(&self, legs: &[LocalOp<'_>], g: usize) -> Result<Vec<Complex64>> {
        self.check_legs(legs)?;
        let others: Vec<LocalOp<'_>> = legs.iter().copied().filter(|l| l.subsystem != g).collect();
        Ok(match &self.repr {
            Repr::Dense => {
                let y = dense_apply(&self.ranks, &self.data, &others);
                let r = self.ranks[g];
                let inner: usize = self.ranks[g + 1..].iter().product();
                let outer: usize = self.ranks[..g].iter().product();
                let mut env = vec![ZERO; r * r];
                for o in 0..outer {
                    for b in 0..r {
                        for a in 0..r {
                            let mut acc = ZERO;
                            let cb = (o * r + b) * inner;
                            let ya = (o * r + a) * inner;
                            for i in 0..inner {
                                acc += self.data[cb + i].conj() * y[ya + i];
                            }
                            env[b * r + a] += acc;
                        }
                    }
                }
                env
            }
            Repr::Train { .. } => self.train_view().environment(&others, g),
        })
    }

    /// `offset + Σ_i w_i ⟨C|⊗A^i|C⟩`, reduced in ascending term order.
    pub fn contract_objective(&self, terms: &[OperatorTerm<'_>], offset: f64) -> Result<Contraction> {
        let parts = terms
            .par_iter()
            .map(|t| self.expectation(&t.legs).map(|v| v * t.weight))
            .collect::<Result<Vec<_>>>()?;
        let total: Complex64 = parts.into_iter().fold(ZERO, |acc, v| acc + v);
        let wl1: f64 = terms.iter().map(|t| t.weight.abs()).sum();
        if total.im.abs() > IMAG_TOL * wl1.max(1.0) {
            return Err(DvqaError::Numerical(format!(
                "objective has imaginary residue {:e}",
                total.im
            )));
        }
        Ok(Contraction {
            value: offset + total.re,
            imag: total.im,
        })
    }

    /// Unconstrained gradient of `Σ_i w_i ⟨C|⊗A^i|C⟩` with respect to the
    /// parameters; equals `2·M·C` in the dense layout.
    pub fn objective_gradient(&self, terms: &[OperatorTerm<'_>]) -> Result<Vec<Complex64>> {
        for t in terms {
            self.check_legs(&t.legs)?;
        }
        let parts: Vec<Vec<Complex64>> = match &self.repr {
            Repr::Dense => terms
                .par_iter()
                .map(|t| dense_apply(&self.ranks, &self.data, &t.legs))
                .collect(),
            Repr::Train { .. } => {
                let view = self.train_view();
                terms.par_iter().map(|t| view.term_gradient(&t.legs)).collect()
            }
        };
        let mut g = vec![ZERO; self.data.len()];
        for (t, part) in terms.iter().zip(parts) {
            for (gi, pi) in g.iter_mut().zip(part) {
                *gi += pi * (2.0 * t.weight);
            }
        }
        Ok(g)
    }

    /// Gradient of `⟨C|C⟩` with respect to the parameters.
    pub fn norm_gradient(&self) -> Vec<Complex64> {
        match &self.repr {
            Repr::Dense => self.data.iter().map(|z| z * 2.0).collect(),
            Repr::Train { .. } => self.train_view().term_gradient(&[]).into_iter().map(|z| z * 2.0).collect(),
        }
    }

    /// Remove the component of `grad` that changes the norm, returning the
    /// projected gradient and the multiplier `λ`.
    ///
    /// Dense: `λ = Re⟨C, g⟩/2` and the result is `g − 2λC`, tangent to the
    /// unit sphere. Train: `λ = Re⟨θ, g⟩ / Re⟨θ, ∇N⟩` over the core
    /// parameters `θ` and the result is `g − λ·∇N`, which is orthogonal to
    /// the scaling direction and equals the gradient of `ℓ/⟨C|C⟩`.
    pub fn project_gradient(&self, grad: &[Complex64]) -> (Vec<Complex64>, f64) {
        let re_dot = |a: &[Complex64], b: &[Complex64]| -> f64 {
            a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
        };
        match &self.repr {
            Repr::Dense => {
                let lambda = re_dot(&self.data, grad) / 2.0;
                let out = grad
                    .iter()
                    .zip(&self.data)
                    .map(|(g, c)| g - c * (2.0 * lambda))
                    .collect();
                (out, lambda)
            }
            Repr::Train { .. } => {
                let gn = self.norm_gradient();
                let lambda = re_dot(&self.data, grad) / re_dot(&self.data, &gn);
                let out = grad.iter().zip(&gn).map(|(g, n)| g - n * lambda).collect();
                (out, lambda)
            }
        }
    }

    /// Sampler of multi-indices `α` with probability `|C_α|²/⟨C|C⟩`.
    pub fn sampler(&self) -> Result<IndexSampler<'_>> {
        let kind = match &self.repr {
            Repr::Dense => {
                let weights: Vec<f64> = self.data.iter().map(|z| z.norm_sqr()).collect();
                let dist = WeightedIndex::new(&weights)
                    .map_err(|e| DvqaError::Numerical(format!("cannot sample from tensor: {e}")))?;
                Sampler::Dense(dist)
            }
            Repr::Train { .. } => {
                if !(self.norm_sqr() > 0.0) {
                    return Err(DvqaError::Numerical("cannot sample from a zero tensor".into()));
                }
                Sampler::Train(self.train_view().norm_rights())
            }
        };
        Ok(IndexSampler { tensor: self, kind })
    }

    fn train_view(&self) -> train::TrainView<'_> {
        match &self.repr {
            Repr::Train { bonds, offsets } => train::TrainView {
                ranks: &self.ranks,
                bonds,
                offsets,
                data: &self.data,
            },
            Repr::Dense => unreachable!("train view of a dense tensor"),
        }
    }
}

/// Serialized as `{layout, ranks, bonds, re, im}` with parameters in storage
/// order.
impl Serialize for CorrelationTensor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CorrelationTensor", 5)?;
        st.serialize_field("layout", if self.is_dense() { "dense" } else { "train" })?;
        st.serialize_field("ranks", &self.ranks)?;
        st.serialize_field("bonds", &self.bonds())?;
        st.serialize_field("re", &self.data.iter().map(|z| z.re).collect::<Vec<_>>())?;
        st.serialize_field("im", &self.data.iter().map(|z| z.im).collect::<Vec<_>>())?;
        st.end()
    }
}

enum Sampler {
    Dense(WeightedIndex<f64>),
    Train(Vec<Vec<Complex64>>),
}

/// Draws multi-indices from the Born distribution of a correlation tensor.
pub struct IndexSampler<'a> {
    tensor: &'a CorrelationTensor,
    kind: Sampler,
}

impl IndexSampler<'_> {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        match &self.kind {
            Sampler::Dense(dist) => {
                let mut flat = dist.sample(rng);
                let mut idx = vec![0; self.tensor.ranks.len()];
                for (slot, &r) in idx.iter_mut().zip(&self.tensor.ranks).rev() {
                    *slot = flat % r;
                    flat /= r;
                }
                idx
            }
            Sampler::Train(rights) => self.tensor.train_view().sample(rights, rng),
        }
    }
}

/// `(⊗ A) C` in the dense layout; identity on unlisted legs.
fn dense_apply(ranks: &[usize], c: &[Complex64], legs: &[LocalOp<'_>]) -> Vec<Complex64> {
    let mut cur = c.to_vec();
    let mut scratch = vec![ZERO; c.len()];
    for leg in legs {
        let k = leg.subsystem;
        let r = ranks[k];
        let inner: usize = ranks[k + 1..].iter().product();
        let outer: usize = ranks[..k].iter().product();
        for o in 0..outer {
            for b in 0..r {
                let dst = (o * r + b) * inner;
                scratch[dst..dst + inner].iter_mut().for_each(|z| *z = ZERO);
                for a in 0..r {
                    let m = leg.matrix[b * r + a];
                    if m == ZERO {
                        continue;
                    }
                    let src = (o * r + a) * inner;
                    for i in 0..inner {
                        scratch[dst + i] += m * cur[src + i];
                    }
                }
            }
        }
        std::mem::swap(&mut cur, &mut scratch);
    }
    cur
}
