//! Subsets, compositions, permutations and matching-field tableaux.
//!
//! Values in `[n]` (subset elements, tableau entries) are 1-based as in the
//! usual Plücker notation. Positions (row and column of a tableau, slots of a
//! permutation) are 0-based in the Rust API; only text I/O is 1-based.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binomial coefficient, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// A composition `a = (a_1, ..., a_s)` of `n` into positive parts.
///
/// The prefix sums `α_0 = 0, α_k = a_1 + ... + a_k` cut `[n]` into the
/// consecutive blocks `I_k = {α_{k-1}+1, ..., α_k}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Composition {
    parts: Vec<usize>,
}

impl Composition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::invalid("composition must have at least one part"));
        }
        if parts.contains(&0) {
            return Err(Error::invalid(format!("composition parts must be positive: {parts:?}")));
        }
        if parts.iter().sum::<usize>() > u8::MAX as usize {
            return Err(Error::invalid("composition total exceeds 255"));
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Number of parts `s`.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    /// `α_k` for `k = 0..=s`.
    pub fn alpha(&self, k: usize) -> usize {
        self.parts[..k].iter().sum()
    }

    /// Block `I_k` (1-based `k`) as an inclusive range of values.
    pub fn block(&self, k: usize) -> std::ops::RangeInclusive<usize> {
        (self.alpha(k - 1) + 1)..=self.alpha(k)
    }

    /// The 1-based block containing value `j`.
    pub fn block_of(&self, j: usize) -> usize {
        let mut acc = 0;
        for (k, &p) in self.parts.iter().enumerate() {
            acc += p;
            if j <= acc {
                return k + 1;
            }
        }
        self.parts.len()
    }

    /// Tail sum `a_i + ... + a_s` (1-based `i`).
    pub fn tail_sum(&self, i: usize) -> usize {
        self.parts[i - 1..].iter().sum()
    }

    /// All compositions of `n`, in lexicographic order of their part lists.
    pub fn all(n: usize) -> Vec<Composition> {
        fn rec(rest: usize, cur: &mut Vec<usize>, out: &mut Vec<Composition>) {
            if rest == 0 {
                out.push(Composition { parts: cur.clone() });
                return;
            }
            for p in 1..=rest {
                cur.push(p);
                rec(rest - p, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if n > 0 {
            rec(n, &mut Vec::new(), &mut out);
        }
        out
    }
}

impl TryFrom<Vec<usize>> for Composition {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Composition::new(v)
    }
}

impl From<Composition> for Vec<usize> {
    fn from(c: Composition) -> Self {
        c.parts
    }
}

impl FromStr for Composition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts = trimmed
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|e| Error::Parse(format!("bad part {p:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Composition::new(parts)
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", body.join(","))
    }
}

/// An `r`-subset `I = {i_1 < ... < i_r}` of `[n]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct PluckerIndex(Vec<u8>);

impl PluckerIndex {
    pub fn new(elements: Vec<u8>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::invalid("empty Plücker index"));
        }
        if elements[0] == 0 {
            return Err(Error::invalid("Plücker index elements are 1-based"));
        }
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!("Plücker index must be strictly increasing: {elements:?}")));
        }
        Ok(Self(elements))
    }

    /// Builds from any list of distinct values, sorting it.
    pub fn from_unsorted(mut elements: Vec<u8>) -> Result<Self> {
        elements.sort_unstable();
        Self::new(elements)
    }

    pub fn elements(&self) -> &[u8] {
        &self.0
    }

    pub fn r(&self) -> usize {
        self.0.len()
    }

    pub fn max(&self) -> u8 {
        *self.0.last().unwrap()
    }

    pub fn contains(&self, v: u8) -> bool {
        self.0.binary_search(&v).is_ok()
    }
}

impl TryFrom<Vec<u8>> for PluckerIndex {
    type Error = Error;
    fn try_from(v: Vec<u8>) -> Result<Self> {
        PluckerIndex::new(v)
    }
}

impl From<PluckerIndex> for Vec<u8> {
    fn from(p: PluckerIndex) -> Self {
        p.0
    }
}

impl fmt::Display for PluckerIndex {
    /// Compact digit form `1237` when every element is a single digit,
    /// comma form `1,2,10` otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&e| e < 10) {
            for e in &self.0 {
                write!(f, "{e}")?;
            }
            Ok(())
        } else {
            let body: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
            write!(f, "{}", body.join(","))
        }
    }
}

impl FromStr for PluckerIndex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('[').trim_end_matches(']');
        let elems: Vec<u8> = if s.contains(',') {
            s.split(',')
                .map(|p| p.trim().parse::<u8>().map_err(|e| Error::Parse(format!("bad element {p:?}: {e}"))))
                .collect::<Result<_>>()?
        } else {
            s.chars()
                .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(|| Error::Parse(format!("bad digit {c:?}"))))
                .collect::<Result<_>>()?
        };
        PluckerIndex::new(elems)
    }
}

/// All `r`-subsets of `[n]` in lexicographic order. This order fixes the
/// indexing of the Plücker variables everywhere in the crate.
pub fn enumerate_subsets(r: usize, n: usize) -> Result<Vec<PluckerIndex>> {
    if r == 0 || n == 0 {
        return Err(Error::invalid("r and n must be positive"));
    }
    if r > n {
        return Err(Error::invalid(format!("r = {r} exceeds n = {n}")));
    }
    if n > u8::MAX as usize {
        return Err(Error::invalid("n exceeds 255"));
    }
    let mut out = Vec::with_capacity(binomial(n, r) as usize);
    let mut cur: Vec<u8> = (1..=r as u8).collect();
    loop {
        out.push(PluckerIndex(cur.clone()));
        // advance to the next subset in lex order
        let mut k = r;
        while k > 0 && cur[k - 1] as usize == n - r + k {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        cur[k - 1] += 1;
        for t in k..r {
            cur[t] = cur[t - 1] + 1;
        }
    }
    Ok(out)
}

/// Position of `subset` in the lexicographic enumeration of `r`-subsets of `[n]`.
pub fn subset_rank(subset: &[u8], n: usize) -> usize {
    let r = subset.len();
    let mut rank = 0u64;
    let mut prev = 0usize;
    for (k, &c) in subset.iter().enumerate() {
        for j in prev + 1..c as usize {
            rank += binomial(n - j, r - k - 1);
        }
        prev = c as usize;
    }
    rank as usize
}

/// Returns `(q, b)`: `q` is the first block of `a` meeting `I`, and `b = |I ∩ I_q|`
/// is the type of `I`.
pub fn type_and_block(index: &PluckerIndex, a: &Composition) -> Result<(usize, usize)> {
    if index.max() as usize > a.n() {
        return Err(Error::invalid(format!("{index} is not a subset of [{}]", a.n())));
    }
    let q = a.block_of(index.elements()[0] as usize);
    let b = index.elements().iter().take_while(|&&e| a.block_of(e as usize) == q).count();
    Ok((q, b))
}

/// A permutation of `[r]`, acting on subsets the way tableaux are drawn:
/// slot `k` of `σ(I)` holds `i_{σ(k)}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct Perm(Vec<u8>);

impl Perm {
    /// `images[k]` is `σ(k+1)`, 1-based.
    pub fn new(images: Vec<u8>) -> Result<Self> {
        let r = images.len();
        let mut seen = vec![false; r + 1];
        for &v in &images {
            let v = v as usize;
            if v == 0 || v > r || seen[v] {
                return Err(Error::invalid(format!("not a permutation of [{r}]: {images:?}")));
            }
            seen[v] = true;
        }
        Ok(Self(images))
    }

    pub fn identity(r: usize) -> Self {
        Self((1..=r as u8).collect())
    }

    /// The cycle `(c_1 c_2 ... c_k)` in `S_r`: `c_1 ↦ c_2 ↦ ... ↦ c_k ↦ c_1`.
    pub fn cycle(r: usize, cycle: &[usize]) -> Result<Self> {
        let mut images: Vec<u8> = (1..=r as u8).collect();
        for (t, &c) in cycle.iter().enumerate() {
            if c == 0 || c > r {
                return Err(Error::invalid(format!("cycle entry {c} outside [{r}]")));
            }
            images[c - 1] = cycle[(t + 1) % cycle.len()] as u8;
        }
        Perm::new(images)
    }

    pub fn images(&self) -> &[u8] {
        &self.0
    }

    pub fn r(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(k, &v)| v as usize == k + 1)
    }

    /// +1 or -1 according to the parity of the permutation.
    pub fn sign(&self) -> i8 {
        let r = self.0.len();
        let mut seen = vec![false; r];
        let mut transpositions = 0;
        for start in 0..r {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                k = self.0[k] as usize - 1;
                len += 1;
            }
            transpositions += len - 1;
        }
        if transpositions % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u8; self.0.len()];
        for (k, &v) in self.0.iter().enumerate() {
            inv[v as usize - 1] = (k + 1) as u8;
        }
        Perm(inv)
    }

    /// Arranges the sorted elements of `index` by this permutation.
    pub fn arrange(&self, index: &PluckerIndex) -> Vec<u8> {
        self.0.iter().map(|&s| index.elements()[s as usize - 1]).collect()
    }

    /// Disjoint-cycle notation, fixed points omitted, `id` for the identity.
    pub fn cycle_notation(&self) -> String {
        let r = self.0.len();
        let mut seen = vec![false; r];
        let mut out = String::new();
        for start in 0..r {
            if seen[start] || self.0[start] as usize == start + 1 {
                continue;
            }
            let mut cyc = Vec::new();
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                cyc.push((k + 1).to_string());
                k = self.0[k] as usize - 1;
            }
            out.push('(');
            out.push_str(&cyc.join(" "));
            out.push(')');
        }
        if out.is_empty() {
            "id".to_string()
        } else {
            out
        }
    }

    /// All permutations of `[r]` in lexicographic order of their image lists.
    pub fn all(r: usize) -> Vec<Perm> {
        let mut cur: Vec<u8> = (1..=r as u8).collect();
        let mut out = vec![Perm(cur.clone())];
        loop {
            // next_permutation
            let mut i = r;
            while i > 1 && cur[i - 2] >= cur[i - 1] {
                i -= 1;
            }
            if i <= 1 {
                break;
            }
            let pivot = i - 2;
            let mut j = r - 1;
            while cur[j] <= cur[pivot] {
                j -= 1;
            }
            cur.swap(pivot, j);
            cur[pivot + 1..].reverse();
            out.push(Perm(cur.clone()));
        }
        out
    }
}

impl TryFrom<Vec<u8>> for Perm {
    type Error = Error;
    fn try_from(v: Vec<u8>) -> Result<Self> {
        Perm::new(v)
    }
}

impl From<Perm> for Vec<u8> {
    fn from(p: Perm) -> Self {
        p.0
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.cycle_notation())
    }
}

/// An `r × m` tableau stored column by column; each column is one Plücker
/// factor arranged by its permutation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u8>>", into = "Vec<Vec<u8>>")]
pub struct Tableau {
    columns: Vec<Vec<u8>>,
}

impl Tableau {
    pub fn new(columns: Vec<Vec<u8>>) -> Result<Self> {
        if let Some(first) = columns.first() {
            let r = first.len();
            if r == 0 {
                return Err(Error::invalid("tableau columns must be nonempty"));
            }
            for col in &columns {
                if col.len() != r {
                    return Err(Error::invalid("tableau columns have different lengths"));
                }
                let mut sorted = col.clone();
                sorted.sort_unstable();
                if sorted[0] == 0 || sorted.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::invalid(format!("column {col:?} is not an arranged subset")));
                }
            }
        }
        Ok(Self { columns })
    }

    pub fn columns(&self) -> &[Vec<u8>] {
        &self.columns
    }

    pub fn num_rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.len())
    }

    pub fn num_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, k: usize) -> Vec<u8> {
        self.columns.iter().map(|c| c[k]).collect()
    }

    /// Sorted entries of row `k`.
    pub fn row_multiset(&self, k: usize) -> Vec<u8> {
        let mut row = self.row(k);
        row.sort_unstable();
        row
    }

    /// The subsets underlying each column.
    pub fn column_indices(&self) -> Vec<PluckerIndex> {
        self.columns
            .iter()
            .map(|c| PluckerIndex::from_unsorted(c.clone()).expect("validated column"))
            .collect()
    }

    pub fn rowwise_equal(&self, other: &Tableau) -> Result<bool> {
        if self.num_rows() != other.num_rows() || self.num_cols() != other.num_cols() {
            return Err(Error::invalid("tableaux have different shapes"));
        }
        Ok((0..self.num_rows()).all(|k| self.row_multiset(k) == other.row_multiset(k)))
    }

    /// Exchanges the entries at `(row_a, col)` and `(row_b, col)`.
    pub fn vertical_swap(&self, col: usize, row_a: usize, row_b: usize) -> Result<Tableau> {
        let rows = self.num_rows();
        if col >= self.num_cols() || row_a >= rows || row_b >= rows {
            return Err(Error::invalid(format!(
                "swap ({row_a},{row_b}) in column {col} outside a {rows}x{} tableau",
                self.num_cols()
            )));
        }
        let mut out = self.clone();
        out.columns[col].swap(row_a, row_b);
        Ok(out)
    }

    /// `ytableau` source, one row per line.
    pub fn to_latex(&self) -> String {
        let rows: Vec<String> = (0..self.num_rows())
            .map(|k| self.row(k).iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" & "))
            .collect();
        format!("\\begin{{ytableau}}\n{}\n\\end{{ytableau}}", rows.join(" \\\\\n"))
    }
}

impl TryFrom<Vec<Vec<u8>>> for Tableau {
    type Error = Error;
    fn try_from(v: Vec<Vec<u8>>) -> Result<Self> {
        Tableau::new(v)
    }
}

impl From<Tableau> for Vec<Vec<u8>> {
    fn from(t: Tableau) -> Self {
        t.columns
    }
}

impl fmt::Display for Tableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols: Vec<String> = self
            .columns
            .iter()
            .map(|c| format!("({})", c.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "[{}]", cols.join("|"))
    }
}

impl FromStr for Tableau {
    type Err = Error;
    /// Parses the bracket form `[(1,3,2,4)|(3,4,5,6)]`.
    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .strip_prefix('[')
            .and_then(|b| b.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("tableau must be bracketed: {s:?}")))?;
        let columns = body
            .split('|')
            .map(|col| {
                let col = col.trim().trim_start_matches('(').trim_end_matches(')');
                col.split(',')
                    .map(|e| e.trim().parse::<u8>().map_err(|err| Error::Parse(format!("bad entry {e:?}: {err}"))))
                    .collect::<Result<Vec<u8>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Tableau::new(columns)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(s: &str) -> PluckerIndex {
        s.parse().unwrap()
    }

    #[test]
    fn subsets_small() {
        let subs = enumerate_subsets(2, 3).unwrap();
        let names: Vec<String> = subs.iter().map(|s| s.to_string()).collect();
        assert_eq!(names, ["12", "13", "23"]);
    }

    #[test]
    fn subsets_counts_and_ends() {
        let subs = enumerate_subsets(4, 8).unwrap();
        assert_eq!(subs.len(), 70);
        assert_eq!(subs[0].to_string(), "1234");
        assert_eq!(subs[69].to_string(), "5678");
        assert_eq!(enumerate_subsets(5, 10).unwrap().len(), 252);
        assert!(matches!(enumerate_subsets(5, 4), Err(Error::InvalidParameters(_))));
    }

    #[test]
    fn rank_matches_enumeration() {
        for (r, n) in [(1, 4), (2, 5), (3, 7), (4, 9), (5, 10)] {
            for (k, s) in enumerate_subsets(r, n).unwrap().iter().enumerate() {
                assert_eq!(subset_rank(s.elements(), n), k);
            }
        }
    }

    #[test]
    fn types_from_worked_examples() {
        let a: Composition = "2,2,3,2".parse().unwrap();
        assert_eq!(type_and_block(&idx("1234"), &a).unwrap(), (1, 2));
        assert_eq!(type_and_block(&idx("5678"), &a).unwrap(), (3, 3));
        let a: Composition = "3,2,3".parse().unwrap();
        assert_eq!(type_and_block(&idx("2678"), &a).unwrap(), (1, 1));
    }

    #[test]
    fn composition_blocks() {
        let a: Composition = "2,2,3,2".parse().unwrap();
        assert_eq!(a.n(), 9);
        assert_eq!(a.block(3), 5..=7);
        assert_eq!(a.block_of(7), 3);
        assert_eq!(a.tail_sum(2), 7);
        assert_eq!(Composition::all(4).len(), 8);
        assert!(Composition::new(vec![2, 0]).is_err());
    }

    #[test]
    fn perm_sign_and_notation() {
        let c = Perm::cycle(4, &[2, 3]).unwrap();
        assert_eq!(c.sign(), -1);
        assert_eq!(c.cycle_notation(), "(2 3)");
        let c = Perm::cycle(4, &[1, 2, 3]).unwrap();
        assert_eq!(c.sign(), 1);
        assert_eq!(c.arrange(&idx("1349")), vec![3, 4, 1, 9]);
        assert_eq!(Perm::identity(3).cycle_notation(), "id");
        assert_eq!(Perm::all(4).len(), 24);
        assert!(Perm::new(vec![1, 1, 2]).is_err());
    }

    #[test]
    fn rowwise_equality_examples() {
        let t: Tableau = "[(6,7,8,2)|(4,6,7,5)]".parse().unwrap();
        let u: Tableau = "[(6,7,8,5)|(4,6,7,2)]".parse().unwrap();
        assert!(t.rowwise_equal(&u).unwrap());
        assert!(t.rowwise_equal(&t).unwrap());
        let x: Tableau = "[(1,2,3)]".parse().unwrap();
        let y: Tableau = "[(1,2,4)]".parse().unwrap();
        assert!(!x.rowwise_equal(&y).unwrap());
        assert!(x.rowwise_equal(&t).is_err());
    }

    #[test]
    fn vertical_swaps() {
        let t: Tableau = "[(1,2,3,4)|(3,4,5,6)]".parse().unwrap();
        assert_eq!(t.vertical_swap(0, 1, 2).unwrap().to_string(), "[(1,3,2,4)|(3,4,5,6)]");
        let t: Tableau = "[(2,3,4,1)]".parse().unwrap();
        assert_eq!(t.vertical_swap(0, 0, 3).unwrap().to_string(), "[(1,3,4,2)]");
        assert_eq!(t.vertical_swap(0, 2, 2).unwrap(), t);
        assert!(t.vertical_swap(1, 0, 1).is_err());
    }

    #[test]
    fn latex_rendering() {
        let t: Tableau = "[(1,3)|(2,4)]".parse().unwrap();
        assert_eq!(t.to_latex(), "\\begin{ytableau}\n1 & 2 \\\\\n3 & 4\n\\end{ytableau}");
    }

    #[test]
    fn tableau_rejects_repeated_entries() {
        assert!(Tableau::new(vec![vec![3, 6, 7, 3]]).is_err());
    }
}
