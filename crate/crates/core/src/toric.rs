//! The matching field ideal `J_Λ = ker ψ_Λ`: lattice kernel, degree-bounded
//! fibers, binomial Buchberger and saturation, and semigroup membership for
//! products of initial monomials.
//!
//! Binomials are handled unsigned (`P^u - P^v`) by the Gröbner engine; the
//! sign `ε` that puts `P^u - ε P^v` into `ker ψ_Λ` depends only on `u` and `v`
//! and is attached afterwards.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::combinat::{binomial, subset_rank};
use crate::error::{Error, Result};
use crate::matchfield::MatchingField;
use crate::poly::{Grid, PMonomial, XMonomial};
use crate::weights::{BetaWeight, WeightMatrix};

/// The monomial map `P_I ↦ sgn(Λ(I)) x_{Λ(I)}` as data.
#[derive(Clone, Debug)]
pub struct ExponentMatrix {
    grid: Grid,
    columns: Vec<XMonomial>,
    signs: Vec<i8>,
    weights: Vec<BetaWeight>,
    by_image: FxHashMap<XMonomial, u16>,
    by_first_row: Vec<Vec<u16>>,
}

impl ExponentMatrix {
    pub fn new(mf: &MatchingField, m: &WeightMatrix) -> Result<Self> {
        let grid = Grid::new(mf.r(), mf.n())?;
        if m.r() != grid.r || m.n() != grid.n {
            return Err(Error::invalid("weight matrix and matching field have different shapes"));
        }
        let mut columns = Vec::with_capacity(mf.subsets().len());
        let mut signs = Vec::with_capacity(mf.subsets().len());
        for v in 0..mf.subsets().len() {
            let (s, x) = mf.initial_monomial(&grid, v);
            columns.push(x);
            signs.push(s);
        }
        let weights = columns.iter().map(|x| m.monomial_weight(&grid, x)).collect();
        Self::from_parts(grid, columns, signs, weights)
    }

    fn from_parts(grid: Grid, columns: Vec<XMonomial>, signs: Vec<i8>, weights: Vec<BetaWeight>) -> Result<Self> {
        if columns.len() > u16::MAX as usize {
            return Err(Error::SizeLimit("too many Plücker variables".into()));
        }
        let mut by_image = FxHashMap::default();
        let mut by_first_row = vec![Vec::new(); grid.n];
        for (v, x) in columns.iter().enumerate() {
            if by_image.insert(*x, v as u16).is_some() {
                return Err(Error::invalid("two Plücker variables share an initial monomial"));
            }
            let first: Vec<usize> = (0..grid.n).filter(|&j| x.exponent(grid.var(0, j)) > 0).collect();
            if first.len() != 1 || x.degree() as usize != grid.r {
                return Err(Error::invalid("initial monomials must use one variable per row"));
            }
            by_first_row[first[0]].push(v as u16);
        }
        Ok(Self { grid, columns, signs, weights, by_image, by_first_row })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn num_vars(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, v: usize) -> &XMonomial {
        &self.columns[v]
    }

    pub fn sign(&self, v: usize) -> i8 {
        self.signs[v]
    }

    /// `w_M(P_I)`: the weight of the initial monomial of `det(x_I)`.
    pub fn weight(&self, v: usize) -> BetaWeight {
        self.weights[v]
    }

    /// `x^{A u}`.
    pub fn image(&self, u: &PMonomial) -> XMonomial {
        u.vars().iter().fold(XMonomial::ONE, |acc, &v| acc.mul(&self.columns[v as usize]))
    }

    /// `∏ sgn(Λ(I))` over the factors of `u`.
    pub fn sign_of(&self, u: &PMonomial) -> i8 {
        u.vars().iter().map(|&v| self.signs[v as usize]).product()
    }

    /// `ψ_Λ(P^u)` as (sign, monomial).
    pub fn psi_lambda(&self, u: &PMonomial) -> (i8, XMonomial) {
        (self.sign_of(u), self.image(u))
    }

    /// The variable whose initial monomial is exactly `x`.
    pub fn variable_with_image(&self, x: &XMonomial) -> Option<usize> {
        self.by_image.get(x).map(|&v| v as usize)
    }

    /// Columns of `A` as integer vectors over the grid.
    pub fn integer_columns(&self) -> Vec<Vec<i64>> {
        self.columns.iter().map(|x| x.to_dense(&self.grid).into_iter().map(i64::from).collect()).collect()
    }

    /// Writes `e` as a product of `m` initial monomials, returning the factors
    /// (sorted variable indices), or `None` when no such product exists. The
    /// search is exhaustive: it branches on the first-row variable of `e`,
    /// which every factor must cover exactly once.
    pub fn semigroup_member(&self, e: &XMonomial, m: usize) -> Option<Vec<u16>> {
        if e.degree() as usize != m * self.grid.r {
            return None;
        }
        let mut out = Vec::with_capacity(m);
        let mut failed = FxHashSet::default();
        if self.factor(*e, m, &mut out, &mut failed) {
            out.sort_unstable();
            Some(out)
        } else {
            None
        }
    }

    fn factor(&self, e: XMonomial, m: usize, out: &mut Vec<u16>, failed: &mut FxHashSet<XMonomial>) -> bool {
        if m == 0 {
            return e == XMonomial::ONE;
        }
        if m == 1 {
            return match self.by_image.get(&e) {
                Some(&v) => {
                    out.push(v);
                    true
                }
                None => false,
            };
        }
        if failed.contains(&e) {
            return false;
        }
        let Some(j) = (0..self.grid.n).find(|&j| e.exponent(self.grid.var(0, j)) > 0) else {
            return false;
        };
        for &v in &self.by_first_row[j] {
            let c = &self.columns[v as usize];
            if c.divides(&e) {
                out.push(v);
                if self.factor(e.div(c), m - 1, out, failed) {
                    return true;
                }
                out.pop();
            }
        }
        failed.insert(e);
        false
    }
}

/// `P^u - ε P^v` with `ψ_Λ(P^u) = ε ψ_Λ(P^v)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedBinomial {
    pub u: PMonomial,
    pub v: PMonomial,
    pub eps: i8,
}

impl SignedBinomial {
    /// Attaches the sign making the binomial vanish under `ψ_Λ`; fails if the
    /// images differ or the supports overlap.
    pub fn new(em: &ExponentMatrix, u: PMonomial, v: PMonomial) -> Result<Self> {
        let b = SignedBinomial { eps: em.sign_of(&u) * em.sign_of(&v), u, v };
        b.check(em)?;
        Ok(b)
    }

    pub fn degree(&self) -> usize {
        self.u.degree()
    }

    pub fn check(&self, em: &ExponentMatrix) -> Result<()> {
        if self.u.vars().iter().chain(self.v.vars()).any(|&x| x as usize >= em.num_vars()) {
            return Err(Error::ValidationFailure("binomial uses an unknown variable".into()));
        }
        let (su, xu) = em.psi_lambda(&self.u);
        let (sv, xv) = em.psi_lambda(&self.v);
        if xu != xv {
            return Err(Error::ValidationFailure("binomial sides have different images".into()));
        }
        if su != self.eps * sv {
            return Err(Error::ValidationFailure("binomial sign does not cancel under ψ_Λ".into()));
        }
        if self.u.vars().iter().any(|x| self.v.vars().contains(x)) {
            return Err(Error::ValidationFailure("binomial sides share a factor".into()));
        }
        Ok(())
    }
}

/// P-monomials of one degree sharing an image, listed in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fiber {
    pub image: XMonomial,
    pub members: Vec<PMonomial>,
}

/// Upper bound on monomials enumerated by [`fibers`].
pub const MAX_ENUMERATED_MONOMIALS: u64 = 5_000_000;

fn multiset_count(nvars: usize, d: usize) -> u64 {
    binomial(nvars + d - 1, d)
}

/// Rank of a sorted multiset of variables among all degree-`d` multisets,
/// in lexicographic order.
fn multiset_rank(vars: &[u16], nvars: usize) -> usize {
    let shifted: Vec<u8> = vars.iter().enumerate().map(|(k, &v)| (v as usize + k + 1) as u8).collect();
    subset_rank(&shifted, nvars + vars.len() - 1)
}

/// All fibers of size at least two among degree-`d` P-monomials, ordered by
/// their first member.
pub fn fibers(em: &ExponentMatrix, d: usize) -> Result<Vec<Fiber>> {
    let nvars = em.num_vars();
    if d == 0 {
        return Ok(Vec::new());
    }
    let count = multiset_count(nvars, d);
    if count > MAX_ENUMERATED_MONOMIALS || nvars + d > 255 {
        return Err(Error::ResourceLimit(format!("{count} monomials of degree {d}")));
    }
    let mut groups: FxHashMap<XMonomial, Vec<u32>> = FxHashMap::default();
    let mut all: Vec<u16> = Vec::with_capacity(count as usize * d);
    let mut cur = vec![0u16; d];
    let mut images = vec![XMonomial::ONE; d + 1];
    // iterate nondecreasing sequences in lexicographic order
    loop {
        for k in 0..d {
            images[k + 1] = images[k].mul(em.column(cur[k] as usize));
        }
        let id = (all.len() / d) as u32;
        all.extend_from_slice(&cur);
        groups.entry(images[d]).or_default().push(id);
        let mut k = d;
        while k > 0 && cur[k - 1] as usize == nvars - 1 {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        cur[k - 1] += 1;
        for t in k..d {
            cur[t] = cur[k - 1];
        }
    }
    let mut out: Vec<Fiber> = groups
        .into_iter()
        .filter(|(_, ids)| ids.len() > 1)
        .map(|(image, ids)| Fiber {
            image,
            members: ids.iter().map(|&i| PMonomial::new(all[i as usize * d..(i as usize + 1) * d].to_vec())).collect(),
        })
        .collect();
    out.sort_by(|a, b| a.members[0].cmp(&b.members[0]));
    Ok(out)
}

/// Number of distinct images of degree-`d` P-monomials, i.e. the dimension of
/// the degree-`d` part of the monomial algebra generated by the initial monomials.
pub fn distinct_images(em: &ExponentMatrix, d: usize) -> Result<usize> {
    let nvars = em.num_vars();
    let total = multiset_count(nvars, d);
    let redundant: usize = fibers(em, d)?.iter().map(|f| f.members.len() - 1).sum();
    Ok(total as usize - redundant)
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n as u32).collect() }
    }

    fn find(&mut self, x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut y = x;
        while self.parent[y as usize] != root {
            let next = self.parent[y as usize];
            self.parent[y as usize] = root;
            y = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// A minimal set of binomials generating the degree `<= d` part of `J_Λ`.
///
/// Degree by degree, the moves already generated connect members of a fiber
/// whenever they differ by a multiple of a lower-degree relation; one new
/// binomial is added per remaining connected component.
pub fn degree_bounded_kernel(em: &ExponentMatrix, d: usize) -> Result<Vec<SignedBinomial>> {
    if d < 2 {
        return Err(Error::invalid("degree bound must be at least 2"));
    }
    let nvars = em.num_vars();
    let mut out = Vec::new();
    let mut prev: Vec<Fiber> = Vec::new();
    for e in 2..=d {
        let current = fibers(em, e)?;
        let size = multiset_count(nvars, e) as usize;
        let mut uf = UnionFind::new(size);
        for f in &prev {
            let base = &f.members[0];
            for k in 0..nvars as u16 {
                let kb = base.mul(&PMonomial::new(vec![k]));
                let rb = multiset_rank(kb.vars(), nvars) as u32;
                for other in &f.members[1..] {
                    let ko = other.mul(&PMonomial::new(vec![k]));
                    uf.union(rb, multiset_rank(ko.vars(), nvars) as u32);
                }
            }
        }
        for f in &current {
            let mut reps: Vec<(u32, &PMonomial)> = Vec::new();
            for mbr in &f.members {
                let root = uf.find(multiset_rank(mbr.vars(), nvars) as u32);
                if !reps.iter().any(|(r, _)| *r == root) {
                    reps.push((root, mbr));
                }
            }
            for (_, other) in &reps[1..] {
                out.push(SignedBinomial::new(em, reps[0].1.clone(), (*other).clone())?);
            }
        }
        prev = current;
    }
    Ok(out)
}

/// Integer row echelon form of `rows`, eliminating the first `cols` columns.
/// Returns the rank; rows past the rank vanish on those columns.
fn echelonize(rows: &mut [Vec<BigInt>], cols: usize) -> usize {
    let mut p = 0;
    for c in 0..cols {
        if p == rows.len() {
            break;
        }
        loop {
            let pick = (p..rows.len()).filter(|&i| !rows[i][c].is_zero()).min_by(|&a, &b| {
                rows[a][c].abs().cmp(&rows[b][c].abs()).then(a.cmp(&b))
            });
            let Some(best) = pick else { break };
            rows.swap(p, best);
            let mut done = true;
            for i in p + 1..rows.len() {
                if rows[i][c].is_zero() {
                    continue;
                }
                let q = rows[i][c].div_floor(&rows[p][c]);
                let pivot = rows[p].clone();
                for (x, y) in rows[i].iter_mut().zip(&pivot) {
                    *x -= &q * y;
                }
                if !rows[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                if rows[p][c].is_negative() {
                    for x in rows[p].iter_mut() {
                        *x = -x.clone();
                    }
                }
                p += 1;
                break;
            }
        }
    }
    p
}

/// A lattice basis of `{u : A u = 0}` by unimodular elimination on `[Aᵀ | I]`.
pub fn lattice_kernel(em: &ExponentMatrix) -> Result<Vec<Vec<i64>>> {
    let cols = em.integer_columns();
    let nvars = cols.len();
    let g = em.grid().vars();
    let mut rows: Vec<Vec<BigInt>> = cols
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut row: Vec<BigInt> = c.iter().map(|&x| BigInt::from(x)).collect();
            row.extend((0..nvars).map(|j| BigInt::from((i == j) as i64)));
            row
        })
        .collect();
    let rank = echelonize(&mut rows, g);
    rows[rank..]
        .iter()
        .map(|row| {
            row[g..]
                .iter()
                .map(|x| x.to_i64().ok_or_else(|| Error::ResourceLimit("kernel entry exceeds i64".into())))
                .collect()
        })
        .collect()
}

/// Membership test for the integer span of a set of vectors.
struct LatticeSpan {
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

impl LatticeSpan {
    fn new(vectors: &[Vec<i64>], dim: usize) -> Self {
        let mut rows: Vec<Vec<BigInt>> =
            vectors.iter().map(|v| v.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let rank = echelonize(&mut rows, dim);
        rows.truncate(rank);
        let pivots = rows.iter().map(|r| r.iter().position(|x| !x.is_zero()).unwrap()).collect();
        Self { rows, pivots }
    }

    fn contains(&self, v: &[i64]) -> bool {
        let mut w: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            if w[c].is_zero() {
                continue;
            }
            let (q, rem) = w[c].div_rem(&row[c]);
            if !rem.is_zero() {
                return false;
            }
            for (x, y) in w.iter_mut().zip(row) {
                *x -= &q * y;
            }
        }
        w.iter().all(|x| x.is_zero())
    }
}

/// A total order on exponent vectors; `Greater` means leading.
pub trait MonomialOrder {
    fn cmp(&self, a: &[u8], b: &[u8]) -> Ordering;
}

fn deg(a: &[u8]) -> u32 {
    a.iter().map(|&x| x as u32).sum()
}

/// Degree reverse lexicographic order with one chosen variable smallest.
pub struct Grevlex {
    pub cheapest: usize,
}

impl MonomialOrder for Grevlex {
    fn cmp(&self, a: &[u8], b: &[u8]) -> Ordering {
        match deg(a).cmp(&deg(b)) {
            Ordering::Equal => {}
            o => return o,
        }
        let c = self.cheapest;
        if a[c] != b[c] {
            return b[c].cmp(&a[c]);
        }
        for v in (0..a.len()).rev() {
            if v != c && a[v] != b[v] {
                return b[v].cmp(&a[v]);
            }
        }
        Ordering::Equal
    }
}

/// Degree, then the induced weight `w_M` (lower weight leads), then
/// lexicographic with the first canonical variable largest.
pub struct WeightOrder {
    pub weights: Vec<BetaWeight>,
}

impl WeightOrder {
    pub fn new(em: &ExponentMatrix) -> Self {
        Self { weights: (0..em.num_vars()).map(|v| em.weight(v)).collect() }
    }

    fn weight(&self, a: &[u8]) -> BetaWeight {
        a.iter().zip(&self.weights).filter(|(e, _)| **e > 0).map(|(&e, w)| w.scaled(e as i64)).sum()
    }
}

impl MonomialOrder for WeightOrder {
    fn cmp(&self, a: &[u8], b: &[u8]) -> Ordering {
        deg(a)
            .cmp(&deg(b))
            .then_with(|| self.weight(b).cmp(&self.weight(a)))
            .then_with(|| a.cmp(b))
    }
}

/// Resource limits for Buchberger runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ToricCaps {
    pub max_pairs: u64,
    pub max_degree: usize,
}

impl Default for ToricCaps {
    fn default() -> Self {
        Self { max_pairs: 1_000_000, max_degree: 12 }
    }
}

type Mask = [u64; 4];

fn mask_of(a: &[u8]) -> Mask {
    let mut m = [0u64; 4];
    for (v, &e) in a.iter().enumerate() {
        if e > 0 {
            m[v / 64] |= 1 << (v % 64);
        }
    }
    m
}

fn mask_subset(a: &Mask, b: &Mask) -> bool {
    (0..4).all(|t| a[t] & !b[t] == 0)
}

fn divides(a: &[u8], b: &[u8]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn lcm(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(&x, &y)| x.max(y)).collect()
}

fn coprime(a: &[u8], b: &[u8]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| x == 0 || y == 0)
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Bin {
    lead: Vec<u8>,
    trail: Vec<u8>,
    mask: Mask,
}

impl Bin {
    fn oriented<O: MonomialOrder>(order: &O, a: Vec<u8>, b: Vec<u8>) -> Option<Bin> {
        match order.cmp(&a, &b) {
            Ordering::Equal => None,
            Ordering::Greater => Some(Bin { mask: mask_of(&a), lead: a, trail: b }),
            Ordering::Less => Some(Bin { mask: mask_of(&b), lead: b, trail: a }),
        }
    }
}

struct Buchberger<'a, O: MonomialOrder> {
    order: &'a O,
    caps: ToricCaps,
    basis: Vec<Bin>,
    pairs: BTreeMap<(u32, u32, u32), Vec<u8>>,
    processed: u64,
}

impl<'a, O: MonomialOrder> Buchberger<'a, O> {
    fn new(order: &'a O, caps: ToricCaps) -> Self {
        Self { order, caps, basis: Vec::new(), pairs: BTreeMap::new(), processed: 0 }
    }

    fn normal_form(&self, mut m: Vec<u8>) -> Vec<u8> {
        'outer: loop {
            let mm = mask_of(&m);
            for g in &self.basis {
                if mask_subset(&g.mask, &mm) && divides(&g.lead, &m) {
                    for ((x, &l), &t) in m.iter_mut().zip(&g.lead).zip(&g.trail) {
                        *x = *x - l + t;
                    }
                    continue 'outer;
                }
            }
            return m;
        }
    }

    fn reduce_pair(&self, a: Vec<u8>, b: Vec<u8>) -> Option<Bin> {
        let a = self.normal_form(a);
        let b = self.normal_form(b);
        Bin::oriented(self.order, a, b)
    }

    /// Adds `h` (already reduced) and updates the pair set with the
    /// Gebauer–Möller criteria.
    fn insert(&mut self, h: Bin) -> Result<()> {
        if deg(&h.lead) as usize > self.caps.max_degree {
            return Err(Error::ResourceLimit(format!(
                "binomial of degree {} exceeds the cap {}",
                deg(&h.lead),
                self.caps.max_degree
            )));
        }
        let t = self.basis.len() as u32;
        let mut cands: Vec<(u32, Vec<u8>, bool)> = self
            .basis
            .iter()
            .enumerate()
            .map(|(i, g)| (i as u32, lcm(&g.lead, &h.lead), coprime(&g.lead, &h.lead)))
            .collect();
        // drop (i,t) when some (j,t) has an lcm properly dividing it
        let keep: Vec<bool> = cands
            .iter()
            .map(|(_, l, _)| !cands.iter().any(|(_, l2, _)| l2 != l && divides(l2, l)))
            .collect();
        let mut survivors: Vec<(u32, Vec<u8>, bool)> =
            cands.drain(..).zip(keep).filter(|(_, k)| *k).map(|(c, _)| c).collect();
        // one pair per lcm; a coprime member makes the whole class redundant
        survivors.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
        let mut chosen = Vec::new();
        let mut i = 0;
        while i < survivors.len() {
            let mut j = i;
            let mut any_coprime = false;
            while j < survivors.len() && survivors[j].1 == survivors[i].1 {
                any_coprime |= survivors[j].2;
                j += 1;
            }
            if !any_coprime {
                chosen.push((survivors[i].0, survivors[i].1.clone()));
            }
            i = j;
        }
        // old pairs made redundant by the new leading term
        let basis = &self.basis;
        self.pairs.retain(|&(_, a, b), l| {
            if !divides(&h.lead, l) {
                return true;
            }
            let la = lcm(&basis[a as usize].lead, &h.lead);
            let lb = lcm(&basis[b as usize].lead, &h.lead);
            la == *l || lb == *l
        });
        for (i, l) in chosen {
            self.pairs.insert((deg(&l), i, t), l);
        }
        self.basis.push(h);
        Ok(())
    }

    fn run(&mut self) -> Result<()> {
        while let Some(((_, i, j), l)) = self.pairs.pop_first() {
            self.processed += 1;
            if self.processed > self.caps.max_pairs {
                return Err(Error::ResourceLimit(format!("more than {} S-pairs", self.caps.max_pairs)));
            }
            let (gi, gj) = (&self.basis[i as usize], &self.basis[j as usize]);
            let a: Vec<u8> = l.iter().zip(&gi.lead).zip(&gi.trail).map(|((&x, &p), &q)| x - p + q).collect();
            let b: Vec<u8> = l.iter().zip(&gj.lead).zip(&gj.trail).map(|((&x, &p), &q)| x - p + q).collect();
            if let Some(h) = self.reduce_pair(a, b) {
                self.insert(h)?;
            }
        }
        Ok(())
    }

    /// Gröbner basis of the ideal generated by `gens`.
    fn compute(order: &'a O, caps: ToricCaps, mut gens: Vec<(Vec<u8>, Vec<u8>)>) -> Result<Vec<Bin>> {
        gens.sort_by_key(|(a, b)| deg(a).max(deg(b)));
        let mut bb = Self::new(order, caps);
        for (a, b) in gens {
            if let Some(h) = bb.reduce_pair(a, b) {
                bb.insert(h)?;
            }
        }
        bb.run()?;
        Ok(reduce_basis(order, bb.basis))
    }
}

/// Minimal, tail-reduced, sorted by leading term.
fn reduce_basis<O: MonomialOrder>(order: &O, basis: Vec<Bin>) -> Vec<Bin> {
    let mut minimal: Vec<Bin> = Vec::new();
    for (i, g) in basis.iter().enumerate() {
        let redundant = basis.iter().enumerate().any(|(j, h)| {
            j != i && mask_subset(&h.mask, &g.mask) && divides(&h.lead, &g.lead) && (h.lead != g.lead || j < i)
        });
        if !redundant {
            minimal.push(g.clone());
        }
    }
    let mut bb = Buchberger::new(order, ToricCaps::default());
    bb.basis = minimal;
    let mut out: Vec<Bin> = (0..bb.basis.len())
        .map(|i| {
            let g = &bb.basis[i];
            Bin { lead: g.lead.clone(), trail: bb.normal_form(g.trail.clone()), mask: g.mask }
        })
        .collect();
    out.sort_by(|a, b| order.cmp(&a.lead, &b.lead));
    out
}

/// Checks Buchberger's criterion: every S-pair with non-coprime leading terms
/// reduces to zero.
pub fn is_groebner<O: MonomialOrder>(order: &O, gens: &[(Vec<u8>, Vec<u8>)]) -> bool {
    let mut bb = Buchberger::new(order, ToricCaps::default());
    for (a, b) in gens {
        match order.cmp(a, b) {
            Ordering::Greater => bb.basis.push(Bin { lead: a.clone(), trail: b.clone(), mask: mask_of(a) }),
            _ => return false,
        }
    }
    for i in 0..bb.basis.len() {
        for j in i + 1..bb.basis.len() {
            let (gi, gj) = (&bb.basis[i], &bb.basis[j]);
            if coprime(&gi.lead, &gj.lead) {
                continue;
            }
            let l = lcm(&gi.lead, &gj.lead);
            let a: Vec<u8> = l.iter().zip(&gi.lead).zip(&gi.trail).map(|((&x, &p), &q)| x - p + q).collect();
            let b: Vec<u8> = l.iter().zip(&gj.lead).zip(&gj.trail).map(|((&x, &p), &q)| x - p + q).collect();
            if bb.normal_form(a) != bb.normal_form(b) {
                return false;
            }
        }
    }
    true
}

/// Generators of `J_Λ` together with the evidence that they form a Gröbner basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToricBasis {
    /// Reduced Gröbner basis in the [`WeightOrder`], `u` the leading side.
    pub generators: Vec<SignedBinomial>,
    pub certified: bool,
}

impl ToricBasis {
    pub fn max_degree(&self) -> usize {
        self.generators.iter().map(|g| g.degree()).max().unwrap_or(0)
    }

    /// Re-checks the sign invariants, the orientation and Buchberger's criterion.
    pub fn verify(&self, em: &ExponentMatrix) -> Result<()> {
        for g in &self.generators {
            g.check(em)?;
        }
        let order = WeightOrder::new(em);
        let n = em.num_vars();
        let pairs: Vec<(Vec<u8>, Vec<u8>)> = self.generators.iter().map(|g| (dense(&g.u, n), dense(&g.v, n))).collect();
        if !is_groebner(&order, &pairs) {
            return Err(Error::ValidationFailure("toric basis fails Buchberger's criterion".into()));
        }
        Ok(())
    }
}

fn dense(m: &PMonomial, n: usize) -> Vec<u8> {
    m.to_dense(n).into_iter().map(|x| x as u8).collect()
}

fn sparse(a: &[u8]) -> PMonomial {
    PMonomial::from_dense(&a.iter().map(|&x| x as u32).collect::<Vec<_>>())
}

fn divide_common(a: &mut [u8], b: &mut [u8], vars: impl Iterator<Item = usize>) {
    for v in vars {
        let c = a[v].min(b[v]);
        a[v] -= c;
        b[v] -= c;
    }
}

/// Saturates the ideal generated by `input` with respect to the product of
/// all variables, one variable at a time (reverse lexicographic order with
/// that variable last), then returns the reduced Gröbner basis of the result
/// in the [`WeightOrder`].
///
/// The result equals `J_Λ` when `input` lies in `J_Λ` and spans its lattice.
pub fn saturate(input: &[SignedBinomial], em: &ExponentMatrix, caps: ToricCaps) -> Result<ToricBasis> {
    let n = em.num_vars();
    let mut gens: Vec<(Vec<u8>, Vec<u8>)> = input.iter().map(|g| (dense(&g.u, n), dense(&g.v, n))).collect();
    for i in 0..n {
        let order = Grevlex { cheapest: i };
        let basis = Buchberger::compute(&order, caps, std::mem::take(&mut gens))?;
        gens = basis
            .into_iter()
            .map(|g| {
                let (mut a, mut b) = (g.lead, g.trail);
                divide_common(&mut a, &mut b, 0..=i);
                (a, b)
            })
            .collect();
    }
    let order = WeightOrder::new(em);
    let basis = Buchberger::compute(&order, caps, gens)?;
    let pairs: Vec<(Vec<u8>, Vec<u8>)> = basis.iter().map(|g| (g.lead.clone(), g.trail.clone())).collect();
    let certified = is_groebner(&order, &pairs);
    let generators = basis
        .into_iter()
        .map(|g| SignedBinomial::new(em, sparse(&g.lead), sparse(&g.trail)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ToricBasis { generators, certified })
}

/// Starting binomials for [`saturate`]: the quadratic moves, completed by
/// lattice kernel vectors that the moves do not already span.
pub fn lattice_generators(em: &ExponentMatrix) -> Result<Vec<SignedBinomial>> {
    let n = em.num_vars();
    let mut gens = degree_bounded_kernel(em, 2)?;
    let kernel = lattice_kernel(em)?;
    let as_vec = |g: &SignedBinomial| -> Vec<i64> {
        let (u, v) = (g.u.to_dense(n), g.v.to_dense(n));
        u.iter().zip(&v).map(|(&a, &b)| a as i64 - b as i64).collect()
    };
    let mut span_vectors: Vec<Vec<i64>> = gens.iter().map(as_vec).collect();
    let mut span = LatticeSpan::new(&span_vectors, n);
    for k in kernel {
        if span.contains(&k) {
            continue;
        }
        let u: Vec<u32> = k.iter().map(|&x| x.max(0) as u32).collect();
        let v: Vec<u32> = k.iter().map(|&x| (-x).max(0) as u32).collect();
        if u.iter().chain(&v).any(|&x| x > u8::MAX as u32) {
            return Err(Error::ResourceLimit("lattice vector entries too large".into()));
        }
        gens.push(SignedBinomial::new(em, PMonomial::from_dense(&u), PMonomial::from_dense(&v))?);
        span_vectors.push(k);
        span = LatticeSpan::new(&span_vectors, n);
    }
    Ok(gens)
}

/// The certified reduced Gröbner basis of `J_Λ`.
pub fn toric_basis(em: &ExponentMatrix, caps: ToricCaps) -> Result<ToricBasis> {
    let gens = lattice_generators(em)?;
    saturate(&gens, em, caps)
}

/// On-disk cache of toric bases, one JSON file per parameter key.
#[derive(Clone, Debug)]
pub struct ToricCache {
    dir: PathBuf,
}

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "BDMF_CACHE_DIR";

impl ToricCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// `$BDMF_CACHE_DIR`, else `$HOME/.cache/bdmf`.
    pub fn from_env() -> Option<Self> {
        if let Some(d) = std::env::var_os(CACHE_ENV) {
            return Some(Self::new(d));
        }
        std::env::var_os("HOME").map(|h| Self::new(Path::new(&h).join(".cache").join("bdmf")))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(description: &str) -> String {
        hex::encode(Sha256::digest(description.as_bytes()))
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// A cached basis, or `None` if absent or unreadable.
    pub fn load(&self, key: &str) -> Option<ToricBasis> {
        let text = std::fs::read_to_string(self.path(key)).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn store(&self, key: &str, basis: &ToricBasis) -> Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        let tmp = self.dir.join(format!("{key}.json.tmp"));
        std::fs::write(&tmp, serde_json::to_string(basis)?)?;
        std::fs::rename(tmp, self.path(key))?;
        Ok(())
    }
}
