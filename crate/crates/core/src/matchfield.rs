//! Matching fields: a permutation for every `r`-subset, either induced by a
//! weight matrix (brute-force argmin) or given by the closed form for the
//! block diagonal family.

use rayon::prelude::*;

use crate::combinat::{enumerate_subsets, subset_rank, type_and_block, Composition, Perm, PluckerIndex, Tableau};
use crate::error::{Error, Result};
use crate::poly::{Grid, XMonomial};
use crate::weights::{BetaWeight, WeightMatrix, MAX_R};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    ClosedForm { a: Composition, ell: usize },
    Matrix,
}

/// Two permutations attaining the same minimal weight for one subset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tie {
    pub index: PluckerIndex,
    pub first: Perm,
    pub second: Perm,
}

#[derive(Clone, Debug)]
pub struct MatchingField {
    r: usize,
    n: usize,
    subsets: Vec<PluckerIndex>,
    perms: Vec<Perm>,
    source: Source,
    coherent: bool,
    tie: Option<Tie>,
}

impl MatchingField {
    /// For every subset, the permutation minimizing `Σ_k M[k][i_{σ(k)}]`.
    /// Exhaustive over `S_r`.
    pub fn induce_from_matrix(m: &WeightMatrix) -> Result<Self> {
        let (r, n) = (m.r(), m.n());
        if r > MAX_R {
            return Err(Error::SizeLimit(format!("r = {r} exceeds {MAX_R}")));
        }
        let subsets = enumerate_subsets(r, n)?;
        let all = Perm::all(r);
        let picks: Vec<(Perm, Option<Perm>)> = subsets
            .par_iter()
            .map(|s| {
                let mut best: Option<(BetaWeight, &Perm)> = None;
                let mut tie: Option<&Perm> = None;
                for p in &all {
                    let w: BetaWeight =
                        p.arrange(s).iter().enumerate().map(|(k, &i)| m.entry(k, i as usize - 1)).sum();
                    match best {
                        Some((bw, _)) if w > bw => {}
                        Some((bw, _)) if w == bw => tie = tie.or(Some(p)),
                        _ => {
                            best = Some((w, p));
                            tie = None;
                        }
                    }
                }
                let (_, p) = best.expect("S_r is nonempty");
                (p.clone(), tie.cloned())
            })
            .collect();
        let tie = subsets.iter().zip(&picks).find_map(|(s, (p, t))| {
            t.as_ref().map(|t| Tie { index: s.clone(), first: p.clone(), second: t.clone() })
        });
        Ok(Self {
            r,
            n,
            subsets,
            perms: picks.into_iter().map(|(p, _)| p).collect(),
            source: Source::Matrix,
            coherent: tie.is_none(),
            tie,
        })
    }

    /// `Λ_{a,ℓ}`: type `b < ℓ` gives the cycle `(b b+1 … ℓ)`, otherwise the identity.
    pub fn closed_form(a: &Composition, ell: usize, r: usize) -> Result<Self> {
        let n = a.n();
        if r < 2 || r > n {
            return Err(Error::invalid(format!("need 2 <= r <= n, got r = {r}, n = {n}")));
        }
        if ell < 2 || ell > r {
            return Err(Error::invalid(format!("need 2 <= ell <= r, got ell = {ell}, r = {r}")));
        }
        let subsets = enumerate_subsets(r, n)?;
        let mut perms = Vec::with_capacity(subsets.len());
        for s in &subsets {
            let (q, b) = type_and_block(s, a)?;
            // the block part of I is an initial segment of I
            debug_assert!(s.elements()[..b].iter().all(|&e| a.block_of(e as usize) == q));
            if b < ell {
                perms.push(Perm::cycle(r, &(b..=ell).collect::<Vec<_>>())?);
            } else {
                perms.push(Perm::identity(r));
            }
        }
        Ok(Self {
            r,
            n,
            subsets,
            perms,
            source: Source::ClosedForm { a: a.clone(), ell },
            coherent: true,
            tie: None,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn subsets(&self) -> &[PluckerIndex] {
        &self.subsets
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    /// For a matrix-induced field, whether every minimizer was unique. The
    /// closed form is coherent by construction (checked against the matrix
    /// by the test suite).
    pub fn is_coherent(&self) -> bool {
        self.coherent
    }

    pub fn tie(&self) -> Option<&Tie> {
        self.tie.as_ref()
    }

    /// Permutations in canonical subset order.
    pub fn perms(&self) -> &[Perm] {
        &self.perms
    }

    pub fn perm(&self, s: &PluckerIndex) -> Result<&Perm> {
        if s.r() != self.r || s.max() as usize > self.n {
            return Err(Error::UnknownIndex(s.to_string()));
        }
        Ok(&self.perms[subset_rank(s.elements(), self.n)])
    }

    /// `T_{I_1 … I_m}`: column `j` is `I_j` arranged by `Λ(I_j)`.
    pub fn tableau_of(&self, factors: &[PluckerIndex]) -> Result<Tableau> {
        let cols = factors.iter().map(|s| Ok(self.perm(s)?.arrange(s))).collect::<Result<Vec<_>>>()?;
        Tableau::new(cols)
    }

    /// `sgn(Λ(I))` and the monomial `x_{Λ(I)}` for the subset with canonical index `v`.
    pub fn initial_monomial(&self, grid: &Grid, v: usize) -> (i8, XMonomial) {
        let p = &self.perms[v];
        let mut m = XMonomial::ONE;
        for (k, &i) in p.arrange(&self.subsets[v]).iter().enumerate() {
            m = m.mul(&XMonomial::var(grid.var(k, i as usize - 1)));
        }
        (p.sign(), m)
    }

    /// Subsets on which two fields over the same `(r, n)` disagree.
    pub fn differences(&self, other: &MatchingField) -> Vec<PluckerIndex> {
        self.subsets
            .iter()
            .zip(self.perms.iter().zip(&other.perms))
            .filter(|(_, (p, q))| p != q)
            .map(|(s, _)| s.clone())
            .collect()
    }
}
