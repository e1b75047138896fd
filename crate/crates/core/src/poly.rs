//! Exact sparse polynomials in the matrix variables `x_{kj}` and in the
//! Plücker variables `P_I`, the map `ψ: P_I ↦ det(x_I)` and initial forms.
//!
//! Matrix monomials are packed four bits per variable into 256 bits, so a
//! grid holds at most 64 variables and every exponent is at most 15. The
//! Plücker-degree guards below keep all arithmetic inside that envelope.

use std::collections::BTreeMap;
use std::fmt;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::combinat::{enumerate_subsets, subset_rank, Perm, PluckerIndex, Tableau};
use crate::error::{Error, Result};
use crate::weights::{BetaWeight, WeightMatrix, MAX_R};

/// Exact integer coefficients. Leading coefficients of products of minors
/// are ±1, so no division ever leaves the integers.
pub type Coeff = i128;

/// Largest Plücker degree representable in packed matrix monomials.
pub const MAX_P_DEGREE: usize = 15;

fn overflow() -> Error {
    Error::ResourceLimit("coefficient overflow".into())
}

/// Shape of the `r × n` variable grid. Variable `(k, j)` (0-based) has index `k·n + j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Grid {
    pub r: usize,
    pub n: usize,
}

impl Grid {
    pub fn new(r: usize, n: usize) -> Result<Self> {
        if r == 0 || n == 0 || r > n {
            return Err(Error::invalid(format!("need 1 <= r <= n, got r = {r}, n = {n}")));
        }
        if r > MAX_R || r * n > 64 {
            return Err(Error::SizeLimit(format!("grid {r}x{n} exceeds 64 variables or {MAX_R} rows")));
        }
        Ok(Self { r, n })
    }

    pub fn vars(&self) -> usize {
        self.r * self.n
    }

    pub fn var(&self, k: usize, j: usize) -> usize {
        k * self.n + j
    }
}

/// A monomial in the matrix variables, exponents packed in nibbles.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct XMonomial {
    w: [u64; 4],
}

const LOW_NIBBLES: u64 = 0x1111_1111_1111_1111;

impl XMonomial {
    pub const ONE: XMonomial = XMonomial { w: [0; 4] };

    /// The degree-one monomial `x_v`.
    pub fn var(v: usize) -> Self {
        let mut w = [0; 4];
        w[v / 16] = 1u64 << (4 * (v % 16));
        Self { w }
    }

    pub fn from_dense(grid: &Grid, exps: &[u8]) -> Result<Self> {
        if exps.len() != grid.vars() {
            return Err(Error::invalid(format!("expected {} exponents, got {}", grid.vars(), exps.len())));
        }
        let mut w = [0u64; 4];
        for (v, &e) in exps.iter().enumerate() {
            if e > 15 {
                return Err(Error::SizeLimit(format!("exponent {e} exceeds 15")));
            }
            w[v / 16] |= (e as u64) << (4 * (v % 16));
        }
        Ok(Self { w })
    }

    pub fn to_dense(&self, grid: &Grid) -> Vec<u8> {
        (0..grid.vars()).map(|v| self.exponent(v)).collect()
    }

    /// The monomial `x_T` of a tableau: entry `i` in row `k` contributes `x_{k,i}`.
    pub fn from_tableau(grid: &Grid, t: &Tableau) -> Result<Self> {
        if t.num_rows() != grid.r {
            return Err(Error::invalid("tableau has the wrong number of rows"));
        }
        if t.num_cols() > MAX_P_DEGREE {
            return Err(Error::SizeLimit("too many tableau columns".into()));
        }
        let mut m = XMonomial::ONE;
        for col in t.columns() {
            for (k, &i) in col.iter().enumerate() {
                if i as usize > grid.n {
                    return Err(Error::invalid(format!("entry {i} exceeds n = {}", grid.n)));
                }
                m = m.mul(&XMonomial::var(grid.var(k, i as usize - 1)));
            }
        }
        Ok(m)
    }

    pub fn exponent(&self, v: usize) -> u8 {
        ((self.w[v / 16] >> (4 * (v % 16))) & 0xf) as u8
    }

    pub fn degree(&self) -> u32 {
        let mut total = 0;
        for &x in &self.w {
            let mut x = x;
            while x != 0 {
                total += (x & 0xf) as u32;
                x >>= 4;
            }
        }
        total
    }

    /// Product; the caller keeps every exponent at most 15.
    pub fn mul(&self, other: &XMonomial) -> XMonomial {
        XMonomial {
            w: [
                self.w[0] + other.w[0],
                self.w[1] + other.w[1],
                self.w[2] + other.w[2],
                self.w[3] + other.w[3],
            ],
        }
    }

    /// Quotient `self / other`, assuming `other` divides `self`.
    pub fn div(&self, other: &XMonomial) -> XMonomial {
        XMonomial {
            w: [
                self.w[0] - other.w[0],
                self.w[1] - other.w[1],
                self.w[2] - other.w[2],
                self.w[3] - other.w[3],
            ],
        }
    }

    /// One bit (at the low end of each nibble) per variable with nonzero exponent.
    pub fn support(&self) -> [u64; 4] {
        let mut s = [0; 4];
        for (t, &x) in self.w.iter().enumerate() {
            s[t] = (x | (x >> 1) | (x >> 2) | (x >> 3)) & LOW_NIBBLES;
        }
        s
    }

    /// Whether this monomial is squarefree.
    pub fn is_squarefree(&self) -> bool {
        self.support() == self.w
    }

    /// Divisibility test.
    pub fn divides(&self, other: &XMonomial) -> bool {
        if self.is_squarefree() {
            let s = other.support();
            return (0..4).all(|t| self.w[t] & !s[t] == 0);
        }
        (0..64).all(|v| self.exponent(v) <= other.exponent(v))
    }

    /// Word order used for the lexicographic tie-break: the variable with the
    /// largest index is compared first.
    pub fn lex_words(&self) -> [u64; 4] {
        [self.w[3], self.w[2], self.w[1], self.w[0]]
    }

    /// Nonzero exponents as `(row, col, exponent)`, 0-based.
    pub fn iter<'a>(&'a self, grid: &'a Grid) -> impl Iterator<Item = (usize, usize, u8)> + 'a {
        (0..grid.vars()).filter_map(move |v| {
            let e = self.exponent(v);
            (e > 0).then_some((v / grid.n, v % grid.n, e))
        })
    }

    /// `x[1,3]^2*x[2,4]` with 1-based positions.
    pub fn display(&self, grid: &Grid) -> String {
        let parts: Vec<String> = self
            .iter(grid)
            .map(|(k, j, e)| {
                if e == 1 {
                    format!("x[{},{}]", k + 1, j + 1)
                } else {
                    format!("x[{},{}]^{e}", k + 1, j + 1)
                }
            })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

/// Sort key realizing the refined total order: weight first, then the
/// lexicographic tie-break. Smaller keys are closer to being initial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermKey {
    pub weight: BetaWeight,
    pub lex: [u64; 4],
}

impl TermKey {
    pub fn new(weight: BetaWeight, mono: &XMonomial) -> Self {
        Self { weight, lex: mono.lex_words() }
    }

    pub fn of(m: &WeightMatrix, grid: &Grid, mono: &XMonomial) -> Self {
        Self::new(m.monomial_weight(grid, mono), mono)
    }
}

/// Sparse polynomial in the matrix variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct XPoly {
    terms: FxHashMap<XMonomial, Coeff>,
}

impl XPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(m: XMonomial, c: Coeff) -> Self {
        let mut p = Self::zero();
        if c != 0 {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &XMonomial) -> Coeff {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&XMonomial, &Coeff)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, m: XMonomial, c: Coeff) -> Result<()> {
        if c == 0 {
            return Ok(());
        }
        let slot = self.terms.entry(m).or_insert(0);
        *slot = slot.checked_add(c).ok_or_else(overflow)?;
        if *slot == 0 {
            self.terms.remove(&m);
        }
        Ok(())
    }

    /// `self + c·other`.
    pub fn add_scaled(&mut self, other: &XPoly, c: Coeff) -> Result<()> {
        for (m, &d) in &other.terms {
            self.add_term(*m, d.checked_mul(c).ok_or_else(overflow)?)?;
        }
        Ok(())
    }

    pub fn mul(&self, other: &XPoly) -> Result<XPoly> {
        let mut out = XPoly::zero();
        for (m1, &c1) in &self.terms {
            for (m2, &c2) in &other.terms {
                let d1 = m1.degree() as usize;
                if d1 + m2.degree() as usize > 64 * 15 {
                    return Err(Error::SizeLimit("monomial degree".into()));
                }
                out.add_term(m1.mul(m2), c1.checked_mul(c2).ok_or_else(overflow)?)?;
            }
        }
        Ok(out)
    }

    /// Terms in increasing refined order (initial term first).
    pub fn sorted_terms(&self, m: &WeightMatrix, grid: &Grid) -> Vec<(XMonomial, Coeff)> {
        let mut v: Vec<(TermKey, XMonomial, Coeff)> =
            self.terms.iter().map(|(x, &c)| (TermKey::of(m, grid, x), *x, c)).collect();
        v.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        v.into_iter().map(|(_, x, c)| (x, c)).collect()
    }

    pub fn display(&self, m: &WeightMatrix, grid: &Grid) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (x, c)) in self.sorted_terms(m, grid).into_iter().enumerate() {
            let mag = c.unsigned_abs();
            if i == 0 {
                if c < 0 {
                    out.push('-');
                }
            } else {
                out.push_str(if c < 0 { " - " } else { " + " });
            }
            if mag != 1 || x == XMonomial::ONE {
                out.push_str(&mag.to_string());
                if x != XMonomial::ONE {
                    out.push('*');
                }
            }
            if x != XMonomial::ONE {
                out.push_str(&x.display(grid));
            }
        }
        out
    }
}

/// The initial (refined-order minimal) term of a polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LeadingTerm {
    pub coeff: Coeff,
    pub mono: XMonomial,
    pub weight: BetaWeight,
    /// No other term shares the minimal weight.
    pub weight_unique: bool,
}

pub fn leading_term(m: &WeightMatrix, grid: &Grid, p: &XPoly) -> Result<LeadingTerm> {
    let mut best: Option<(TermKey, XMonomial, Coeff)> = None;
    let mut ties = 0usize;
    for (x, &c) in p.terms() {
        let key = TermKey::of(m, grid, x);
        match &best {
            Some((k, _, _)) if key.weight > k.weight => {}
            Some((k, _, _)) if key.weight == k.weight => {
                ties += 1;
                if key < *k {
                    best = Some((key, *x, c));
                }
            }
            _ => {
                ties = 0;
                best = Some((key, *x, c));
            }
        }
    }
    let (key, mono, coeff) = best.ok_or(Error::UndefinedOnZero)?;
    Ok(LeadingTerm { coeff, mono, weight: key.weight, weight_unique: ties == 0 })
}

/// Sum of the terms of minimal weight.
pub fn initial_form(m: &WeightMatrix, grid: &Grid, p: &XPoly) -> Result<XPoly> {
    let lead = leading_term(m, grid, p)?;
    let mut out = XPoly::zero();
    for (x, &c) in p.terms() {
        if m.monomial_weight(grid, x) == lead.weight {
            out.add_term(*x, c)?;
        }
    }
    Ok(out)
}

/// A Plücker monomial: the multiset of variable indices (canonical subset
/// ranks), kept sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PMonomial(Vec<u16>);

impl PMonomial {
    pub fn one() -> Self {
        Self(Vec::new())
    }

    pub fn new(mut vars: Vec<u16>) -> Self {
        vars.sort_unstable();
        Self(vars)
    }

    pub fn vars(&self) -> &[u16] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, other: &PMonomial) -> PMonomial {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        PMonomial::new(v)
    }

    /// `u` as a dense exponent vector over `nvars` variables.
    pub fn to_dense(&self, nvars: usize) -> Vec<u32> {
        let mut d = vec![0; nvars];
        for &v in &self.0 {
            d[v as usize] += 1;
        }
        d
    }

    pub fn from_dense(d: &[u32]) -> Self {
        let mut v = Vec::new();
        for (i, &e) in d.iter().enumerate() {
            v.extend(std::iter::repeat_n(i as u16, e as usize));
        }
        Self(v)
    }

    pub fn display(&self, subsets: &[PluckerIndex]) -> String {
        if self.0.is_empty() {
            return "1".to_string();
        }
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.0.len() {
            let v = self.0[i];
            let mut e = 0;
            while i < self.0.len() && self.0[i] == v {
                e += 1;
                i += 1;
            }
            let s = &subsets[v as usize];
            let body: Vec<String> = s.elements().iter().map(|x| x.to_string()).collect();
            if e == 1 {
                out.push(format!("P[{}]", body.join(",")));
            } else {
                out.push(format!("P[{}]^{e}", body.join(",")));
            }
        }
        out.join("*")
    }
}

/// Sparse polynomial in the Plücker variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PPoly {
    terms: BTreeMap<PMonomial, Coeff>,
}

impl PPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(m: PMonomial, c: Coeff) -> Self {
        let mut p = Self::zero();
        if c != 0 {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PMonomial, &Coeff)> {
        self.terms.iter()
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, m: PMonomial, c: Coeff) -> Result<()> {
        if c == 0 {
            return Ok(());
        }
        let slot = self.terms.entry(m.clone()).or_insert(0);
        *slot = slot.checked_add(c).ok_or_else(overflow)?;
        if *slot == 0 {
            self.terms.remove(&m);
        }
        Ok(())
    }

    pub fn add_scaled(&mut self, other: &PPoly, c: Coeff) -> Result<()> {
        for (m, &d) in &other.terms {
            self.add_term(m.clone(), d.checked_mul(c).ok_or_else(overflow)?)?;
        }
        Ok(())
    }

    pub fn mul(&self, other: &PPoly) -> Result<PPoly> {
        let mut out = PPoly::zero();
        for (m1, &c1) in &self.terms {
            for (m2, &c2) in &other.terms {
                out.add_term(m1.mul(m2), c1.checked_mul(c2).ok_or_else(overflow)?)?;
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<PPoly> {
        let mut out = PPoly::monomial(PMonomial::one(), 1);
        for _ in 0..e {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    pub fn display(&self, subsets: &[PluckerIndex]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, &c)) in self.terms.iter().enumerate() {
            let mag = c.unsigned_abs();
            if i == 0 {
                if c < 0 {
                    out.push('-');
                }
            } else {
                out.push_str(if c < 0 { " - " } else { " + " });
            }
            if mag != 1 || m.degree() == 0 {
                out.push_str(&mag.to_string());
                if m.degree() > 0 {
                    out.push('*');
                }
            }
            if m.degree() > 0 {
                out.push_str(&m.display(subsets));
            }
        }
        out
    }
}

/// One term of a Leibniz expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DetTerm {
    pub mono: XMonomial,
    pub sign: i8,
    pub perm_index: u16,
}

/// The Plücker variables of `Gr(r, n)` together with the expanded minors.
#[derive(Clone, Debug)]
pub struct PluckerRing {
    grid: Grid,
    subsets: Vec<PluckerIndex>,
    perms: Vec<Perm>,
    dets: Vec<Vec<DetTerm>>,
}

impl PluckerRing {
    pub fn new(r: usize, n: usize) -> Result<Self> {
        let grid = Grid::new(r, n)?;
        let subsets = enumerate_subsets(r, n)?;
        let perms = Perm::all(r);
        let dets = subsets.iter().map(|s| det_terms(&grid, &perms, s)).collect();
        Ok(Self { grid, subsets, perms, dets })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn subsets(&self) -> &[PluckerIndex] {
        &self.subsets
    }

    pub fn num_vars(&self) -> usize {
        self.subsets.len()
    }

    /// All permutations of `[r]`, indexed as in [`DetTerm::perm_index`].
    pub fn perms(&self) -> &[Perm] {
        &self.perms
    }

    pub fn det(&self, var: usize) -> &[DetTerm] {
        &self.dets[var]
    }

    /// Canonical variable index of a subset.
    pub fn index_of(&self, s: &PluckerIndex) -> Result<usize> {
        if s.r() != self.grid.r || s.max() as usize > self.grid.n {
            return Err(Error::UnknownIndex(format!("{s} in Gr({},{})", self.grid.r, self.grid.n)));
        }
        Ok(subset_rank(s.elements(), self.grid.n))
    }

    pub fn pmonomial(&self, factors: &[PluckerIndex]) -> Result<PMonomial> {
        let vars = factors.iter().map(|s| self.index_of(s).map(|i| i as u16)).collect::<Result<Vec<_>>>()?;
        Ok(PMonomial::new(vars))
    }

    pub fn factors(&self, m: &PMonomial) -> Vec<PluckerIndex> {
        m.vars().iter().map(|&v| self.subsets[v as usize].clone()).collect()
    }

    /// `det(x_I)` as a polynomial.
    pub fn plucker_det(&self, s: &PluckerIndex) -> Result<XPoly> {
        let v = self.index_of(s)?;
        let mut p = XPoly::zero();
        for t in &self.dets[v] {
            p.add_term(t.mono, t.sign as Coeff)?;
        }
        Ok(p)
    }

    /// `ψ(m)`, fully expanded.
    pub fn psi_monomial(&self, m: &PMonomial) -> Result<XPoly> {
        if m.degree() > MAX_P_DEGREE {
            return Err(Error::SizeLimit(format!("Plücker degree {} exceeds {MAX_P_DEGREE}", m.degree())));
        }
        let mut acc: FxHashMap<XMonomial, Coeff> = FxHashMap::default();
        acc.insert(XMonomial::ONE, 1);
        for &v in m.vars() {
            let mut next: FxHashMap<XMonomial, Coeff> = FxHashMap::default();
            next.reserve(acc.len() * self.dets[v as usize].len());
            for (x, &c) in &acc {
                for t in &self.dets[v as usize] {
                    *next.entry(x.mul(&t.mono)).or_insert(0) += c * t.sign as Coeff;
                }
            }
            next.retain(|_, c| *c != 0);
            acc = next;
        }
        Ok(XPoly { terms: acc })
    }

    /// `ψ(p)`. The total matrix degree of every term is bounded by `cap`.
    pub fn apply_psi(&self, p: &PPoly, cap: usize) -> Result<XPoly> {
        let mut out = XPoly::zero();
        for (m, &c) in p.terms() {
            if m.degree() * self.grid.r > cap {
                return Err(Error::SizeLimit(format!(
                    "matrix degree {} exceeds the cap {cap}",
                    m.degree() * self.grid.r
                )));
            }
            out.add_scaled(&self.psi_monomial(m)?, c)?;
        }
        Ok(out)
    }

    /// Default degree cap for [`PluckerRing::apply_psi`].
    pub fn default_cap(&self) -> usize {
        4 * self.grid.r
    }

    /// Parses expressions such as `P[1,2,3,7]*P[4,5,6,8] - 2*P[1,2,3,8]^2`.
    pub fn parse(&self, src: &str) -> Result<PPoly> {
        let mut p = Parser { ring: self, s: src.as_bytes(), pos: 0 };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(Error::Parse(format!("unexpected input at offset {}: {:?}", p.pos, &src[p.pos..])));
        }
        Ok(out)
    }

    /// Arranges each factor so that the product of its arranged monomials is `e`.
    /// Columns follow the order of `factors`; permutations are tried in
    /// lexicographic order, so the answer is deterministic.
    pub fn realize_tableau(&self, e: &XMonomial, factors: &[PluckerIndex]) -> Option<Tableau> {
        fn rec(
            ring: &PluckerRing,
            rest: XMonomial,
            factors: &[PluckerIndex],
            cols: &mut Vec<Vec<u8>>,
        ) -> bool {
            let Some((first, tail)) = factors.split_first() else {
                return rest == XMonomial::ONE;
            };
            let Ok(v) = ring.index_of(first) else { return false };
            for t in &ring.dets[v] {
                if t.mono.divides(&rest) {
                    cols.push(ring.perms[t.perm_index as usize].arrange(first));
                    if rec(ring, rest.div(&t.mono), tail, cols) {
                        return true;
                    }
                    cols.pop();
                }
            }
            false
        }
        let mut cols = Vec::new();
        if rec(self, *e, factors, &mut cols) {
            Tableau::new(cols).ok()
        } else {
            None
        }
    }
}

fn det_terms(grid: &Grid, perms: &[Perm], s: &PluckerIndex) -> Vec<DetTerm> {
    perms
        .iter()
        .enumerate()
        .map(|(pi, p)| {
            let mut mono = XMonomial::ONE;
            for (k, &col) in p.arrange(s).iter().enumerate() {
                mono = mono.mul(&XMonomial::var(grid.var(k, col as usize - 1)));
            }
            DetTerm { mono, sign: p.sign(), perm_index: pi as u16 }
        })
        .collect()
}

struct Parser<'a> {
    ring: &'a PluckerRing,
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse(format!("{msg} at offset {}", self.pos)))
    }

    fn expr(&mut self) -> Result<PPoly> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                let mut t = PPoly::zero();
                t.add_scaled(&self.term()?, -1)?;
                t
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc.add_scaled(&self.term()?, 1)?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc.add_scaled(&self.term()?, -1)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<PPoly> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc.mul(&self.factor()?)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<PPoly> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.integer()?;
            if e > MAX_P_DEGREE as u128 {
                return self.err("exponent too large");
            }
            return base.pow(e as u32);
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<u128> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an integer");
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        text.parse::<u128>().map_err(|e| Error::Parse(format!("{e}: {text}")))
    }

    fn atom(&mut self) -> Result<PPoly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'P') => {
                self.pos += 1;
                let start = self.pos;
                let text = if self.s.get(self.pos) == Some(&b'[') {
                    while self.pos < self.s.len() && self.s[self.pos] != b']' {
                        self.pos += 1;
                    }
                    if self.pos == self.s.len() {
                        return self.err("unterminated Plücker index");
                    }
                    self.pos += 1;
                    &self.s[start + 1..self.pos - 1]
                } else {
                    while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    &self.s[start..self.pos]
                };
                let idx: PluckerIndex = std::str::from_utf8(text).unwrap().parse()?;
                let v = self.ring.index_of(&idx)?;
                Ok(PPoly::monomial(PMonomial::new(vec![v as u16]), 1))
            }
            Some(c) if c.is_ascii_digit() => {
                let v = self.integer()?;
                let c = Coeff::try_from(v).map_err(|_| overflow())?;
                Ok(PPoly::monomial(PMonomial::one(), c))
            }
            _ => self.err("expected a coefficient, P[...] or '('"),
        }
    }
}

impl fmt::Display for PMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}
