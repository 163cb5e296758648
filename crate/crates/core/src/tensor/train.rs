use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::{LocalOp, ZERO};

pub(super) fn bond_dims(ranks: &[usize], bond: usize) -> Vec<usize> {
    let k = ranks.len();
    let mut bonds = vec![1usize; k + 1];
    for (b, slot) in bonds.iter_mut().enumerate().take(k).skip(1) {
        let left = ranks[..b].iter().try_fold(1usize, |a, &r| a.checked_mul(r)).unwrap_or(usize::MAX);
        let right = ranks[b..].iter().try_fold(1usize, |a, &r| a.checked_mul(r)).unwrap_or(usize::MAX);
        *slot = bond.min(left).min(right);
    }
    bonds
}

pub(super) fn core_offsets(ranks: &[usize], bonds: &[usize]) -> (Vec<usize>, usize) {
    let mut offsets = Vec::with_capacity(ranks.len());
    let mut total = 0;
    for (k, &r) in ranks.iter().enumerate() {
        offsets.push(total);
        total += bonds[k] * r * bonds[k + 1];
    }
    (offsets, total)
}

pub(super) struct TrainView<'a> {
    pub ranks: &'a [usize],
    pub bonds: &'a [usize],
    pub offsets: &'a [usize],
    pub data: &'a [Complex64],
}

fn find<'a>(legs: &[LocalOp<'a>], k: usize) -> Option<&'a [Complex64]> {
    legs.iter().find(|l| l.subsystem == k).map(|l| l.matrix)
}

impl<'a> TrainView<'a> {
    fn dims(&self, k: usize) -> (usize, usize, usize) {
        (self.bonds[k], self.ranks[k], self.bonds[k + 1])
    }

    fn core(&self, k: usize) -> &'a [Complex64] {
        let (l, r, rr) = self.dims(k);
        &self.data[self.offsets[k]..self.offsets[k] + l * r * rr]
    }

    /// `T[a][β][b] = Σ_α A[β][α] G[a][α][b]`.
    fn act(&self, k: usize, op: Option<&[Complex64]>) -> Vec<Complex64> {
        let g = self.core(k);
        let Some(op) = op else {
            return g.to_vec();
        };
        let (l, r, rr) = self.dims(k);
        let mut t = vec![ZERO; l * r * rr];
        for a in 0..l {
            for be in 0..r {
                let dst = (a * r + be) * rr;
                for al in 0..r {
                    let m = op[be * r + al];
                    if m == ZERO {
                        continue;
                    }
                    let src = (a * r + al) * rr;
                    for b in 0..rr {
                        t[dst + b] += m * g[src + b];
                    }
                }
            }
        }
        t
    }

    /// Left environment update `L[a'][a] → L'[b'][b]`.
    fn step_left(&self, left: &[Complex64], k: usize, op: Option<&[Complex64]>) -> Vec<Complex64> {
        let (l, r, rr) = self.dims(k);
        let g = self.core(k);
        let t = self.act(k, op);
        // U[a'][β][b] = Σ_a L[a'][a] T[a][β][b]
        let mut u = vec![ZERO; l * r * rr];
        for ap in 0..l {
            for a in 0..l {
                let lv = left[ap * l + a];
                if lv == ZERO {
                    continue;
                }
                for x in 0..r * rr {
                    u[ap * r * rr + x] += lv * t[a * r * rr + x];
                }
            }
        }
        let mut out = vec![ZERO; rr * rr];
        for ap in 0..l {
            for be in 0..r {
                let base = (ap * r + be) * rr;
                for bp in 0..rr {
                    let gc = g[base + bp].conj();
                    for b in 0..rr {
                        out[bp * rr + b] += gc * u[base + b];
                    }
                }
            }
        }
        out
    }

    /// Right environment update `R[b'][b] → R'[a'][a]`.
    fn step_right(&self, right: &[Complex64], k: usize, op: Option<&[Complex64]>) -> Vec<Complex64> {
        let (l, r, rr) = self.dims(k);
        let g = self.core(k);
        let t = self.act(k, op);
        // U[a][β][b'] = Σ_b T[a][β][b] R[b'][b]
        let mut u = vec![ZERO; l * r * rr];
        for ab in 0..l * r {
            for bp in 0..rr {
                let mut acc = ZERO;
                for b in 0..rr {
                    acc += t[ab * rr + b] * right[bp * rr + b];
                }
                u[ab * rr + bp] = acc;
            }
        }
        let mut out = vec![ZERO; l * l];
        for ap in 0..l {
            for a in 0..l {
                let mut acc = ZERO;
                for be in 0..r {
                    for bp in 0..rr {
                        acc += g[(ap * r + be) * rr + bp].conj() * u[(a * r + be) * rr + bp];
                    }
                }
                out[ap * l + a] = acc;
            }
        }
        out
    }

    fn lefts(&self, legs: &[LocalOp<'_>], upto: usize) -> Vec<Vec<Complex64>> {
        let mut envs = Vec::with_capacity(upto + 1);
        envs.push(vec![Complex64::new(1.0, 0.0)]);
        for k in 0..upto {
            let next = self.step_left(&envs[k], k, find(legs, k));
            envs.push(next);
        }
        envs
    }

    /// `rights[k]` is the environment of cores `k..K`; `rights[K] = [1]`.
    fn rights(&self, legs: &[LocalOp<'_>], from: usize) -> Vec<Vec<Complex64>> {
        let kk = self.ranks.len();
        let mut envs = vec![Vec::new(); kk + 1];
        envs[kk] = vec![Complex64::new(1.0, 0.0)];
        for k in (from..kk).rev() {
            envs[k] = self.step_right(&envs[k + 1], k, find(legs, k));
        }
        envs
    }

    pub fn norm_sqr(&self) -> f64 {
        self.expectation(&[]).re
    }

    pub fn expectation(&self, legs: &[LocalOp<'_>]) -> Complex64 {
        let kk = self.ranks.len();
        let mut left = vec![Complex64::new(1.0, 0.0)];
        for k in 0..kk {
            left = self.step_left(&left, k, find(legs, k));
        }
        left[0]
    }

    pub fn environment(&self, others: &[LocalOp<'_>], g: usize) -> Vec<Complex64> {
        let lefts = self.lefts(others, g);
        let rights = self.rights(others, g + 1);
        self.core_env(&lefts[g], &rights[g + 1], g)
    }

    /// `E[β][α] = Σ L[a'][a] conj(G[a'][β][b']) G[a][α][b] R[b'][b]`.
    fn core_env(&self, left: &[Complex64], right: &[Complex64], g: usize) -> Vec<Complex64> {
        let (l, r, rr) = self.dims(g);
        let core = self.core(g);
        // V[a'][α][b'] = Σ_{a,b} L[a'][a] G[a][α][b] R[b'][b]
        let v = self.sandwich(left, right, g, core);
        let mut env = vec![ZERO; r * r];
        for ap in 0..l {
            for be in 0..r {
                for al in 0..r {
                    let mut acc = ZERO;
                    for bp in 0..rr {
                        acc += core[(ap * r + be) * rr + bp].conj() * v[(ap * r + al) * rr + bp];
                    }
                    env[be * r + al] += acc;
                }
            }
        }
        env
    }

    /// `Σ_{a,b} L[a'][a] X[a][α][b] R[b'][b]`, indexed `[a'][α][b']`.
    fn sandwich(&self, left: &[Complex64], right: &[Complex64], k: usize, x: &[Complex64]) -> Vec<Complex64> {
        let (l, r, rr) = self.dims(k);
        let mut lx = vec![ZERO; l * r * rr];
        for ap in 0..l {
            for a in 0..l {
                let lv = left[ap * l + a];
                if lv == ZERO {
                    continue;
                }
                for y in 0..r * rr {
                    lx[ap * r * rr + y] += lv * x[a * r * rr + y];
                }
            }
        }
        let mut out = vec![ZERO; l * r * rr];
        for ar in 0..l * r {
            for bp in 0..rr {
                let mut acc = ZERO;
                for b in 0..rr {
                    acc += lx[ar * rr + b] * right[bp * rr + b];
                }
                out[ar * rr + bp] = acc;
            }
        }
        out
    }

    /// `∂⟨C|⊗A|C⟩/∂conj(G_k)` for every core, concatenated.
    pub fn term_gradient(&self, legs: &[LocalOp<'_>]) -> Vec<Complex64> {
        let kk = self.ranks.len();
        let lefts = self.lefts(legs, kk - 1);
        let rights = self.rights(legs, 1);
        let mut out = Vec::with_capacity(self.data.len());
        for k in 0..kk {
            let t = self.act(k, find(legs, k));
            out.extend(self.sandwich(&lefts[k], &rights[k + 1], k, &t));
        }
        out
    }

    /// Contract all cores into dense row-major amplitudes.
    pub fn expand(&self, n: usize) -> Vec<Complex64> {
        let mut cur = vec![Complex64::new(1.0, 0.0)];
        let mut prefix = 1usize;
        for k in 0..self.ranks.len() {
            let (l, r, rr) = self.dims(k);
            let g = self.core(k);
            let mut next = vec![ZERO; prefix * r * rr];
            for p in 0..prefix {
                for a in 0..l {
                    let cv = cur[p * l + a];
                    if cv == ZERO {
                        continue;
                    }
                    for al in 0..r {
                        for b in 0..rr {
                            next[(p * r + al) * rr + b] += cv * g[(a * r + al) * rr + b];
                        }
                    }
                }
            }
            cur = next;
            prefix *= r;
        }
        debug_assert_eq!(cur.len(), n);
        cur
    }

    /// Norm environments of every suffix, used by [`TrainView::sample`].
    pub fn norm_rights(&self) -> Vec<Vec<Complex64>> {
        self.rights(&[], 0)
    }

    /// Draw one multi-index with probability `|C_α|² / ⟨C|C⟩`, one leg at a
    /// time from the exact conditional marginals.
    pub fn sample<R: Rng + ?Sized>(&self, rights: &[Vec<Complex64>], rng: &mut R) -> Vec<usize> {
        let mut v = vec![Complex64::new(1.0, 0.0)];
        let mut out = Vec::with_capacity(self.ranks.len());
        for k in 0..self.ranks.len() {
            let (l, r, rr) = self.dims(k);
            let g = self.core(k);
            let right = &rights[k + 1];
            let mut cands = Vec::with_capacity(r);
            let mut weights = Vec::with_capacity(r);
            for al in 0..r {
                let mut w = vec![ZERO; rr];
                for (a, &va) in v.iter().enumerate().take(l) {
                    for b in 0..rr {
                        w[b] += va * g[(a * r + al) * rr + b];
                    }
                }
                let mut p = ZERO;
                for bp in 0..rr {
                    for b in 0..rr {
                        p += w[bp].conj() * w[b] * right[bp * rr + b];
                    }
                }
                weights.push(p.re.max(0.0));
                cands.push(w);
            }
            let pick = match WeightedIndex::new(&weights) {
                Ok(dist) => dist.sample(rng),
                Err(_) => rng.random_range(0..r),
            };
            let scale = weights[pick].sqrt();
            v = cands.swap_remove(pick);
            if scale > 0.0 {
                v.iter_mut().for_each(|z| *z /= scale);
            }
            out.push(pick);
        }
        out
    }
}
