//! Symbolic β-weights and the block diagonal weight matrices.
//!
//! A [`BetaWeight`] is a polynomial in a formal parameter β with integer
//! coefficients, compared as if β were arbitrarily large. Lower weight means
//! initial term throughout the crate.

use std::cmp::Ordering;
use std::fmt;

use crate::combinat::Composition;
use crate::error::{Error, Result};
use crate::poly::{Grid, XMonomial};

/// Highest supported power of β is `MAX_POWERS - 1`, enough for `r <= 8`.
pub const MAX_POWERS: usize = 7;

/// Largest number of rows supported by the weight and polynomial layers.
pub const MAX_R: usize = MAX_POWERS + 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct BetaWeight {
    c: [i64; MAX_POWERS],
}

impl BetaWeight {
    pub const ZERO: BetaWeight = BetaWeight { c: [0; MAX_POWERS] };

    /// `coeffs[d]` is the coefficient of `β^d`.
    pub fn from_coeffs(coeffs: &[i64]) -> Result<Self> {
        if coeffs.len() > MAX_POWERS {
            return Err(Error::SizeLimit(format!("at most {MAX_POWERS} powers of β are supported")));
        }
        let mut c = [0; MAX_POWERS];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Ok(Self { c })
    }

    /// `coeff · β^power`.
    pub fn monomial(coeff: i64, power: usize) -> Self {
        let mut c = [0; MAX_POWERS];
        c[power] = coeff;
        Self { c }
    }

    pub fn coeff(&self, power: usize) -> i64 {
        self.c[power]
    }

    /// Coefficients of `β^0 .. β^{len-1}`.
    pub fn coeffs(&self, len: usize) -> Vec<i64> {
        self.c[..len].to_vec()
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    pub fn scaled(&self, k: i64) -> Self {
        let mut c = self.c;
        for x in &mut c {
            *x *= k;
        }
        Self { c }
    }

    /// Numeric value at a concrete β.
    pub fn eval(&self, beta: i128) -> i128 {
        self.c.iter().rev().fold(0i128, |acc, &x| acc * beta + x as i128)
    }
}

impl std::ops::Add for BetaWeight {
    type Output = BetaWeight;
    fn add(mut self, rhs: BetaWeight) -> BetaWeight {
        self += rhs;
        self
    }
}

impl std::ops::AddAssign for BetaWeight {
    fn add_assign(&mut self, rhs: BetaWeight) {
        for (x, y) in self.c.iter_mut().zip(rhs.c) {
            *x += y;
        }
    }
}

impl std::ops::Sub for BetaWeight {
    type Output = BetaWeight;
    fn sub(mut self, rhs: BetaWeight) -> BetaWeight {
        for (x, y) in self.c.iter_mut().zip(rhs.c) {
            *x -= y;
        }
        self
    }
}

impl std::iter::Sum for BetaWeight {
    fn sum<I: Iterator<Item = BetaWeight>>(iter: I) -> BetaWeight {
        iter.fold(BetaWeight::ZERO, |a, b| a + b)
    }
}

impl Ord for BetaWeight {
    /// The dominant power of β decides.
    fn cmp(&self, other: &Self) -> Ordering {
        for d in (0..MAX_POWERS).rev() {
            match self.c[d].cmp(&other.c[d]) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for BetaWeight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Compares two explicit coefficient vectors; they must have equal length.
pub fn compare_weights(w1: &[i64], w2: &[i64]) -> Result<Ordering> {
    if w1.len() != w2.len() {
        return Err(Error::invalid(format!("weight lengths differ: {} vs {}", w1.len(), w2.len())));
    }
    Ok(BetaWeight::from_coeffs(w1)?.cmp(&BetaWeight::from_coeffs(w2)?))
}

fn superscript(d: usize) -> String {
    const SUP: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    d.to_string().chars().map(|c| SUP[c.to_digit(10).unwrap() as usize]).collect()
}

impl fmt::Display for BetaWeight {
    /// `0`, `7`, `9·β²`, `1 + 6·β`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (d, &x) in self.c.iter().enumerate() {
            if x == 0 {
                continue;
            }
            parts.push(match d {
                0 => x.to_string(),
                1 => format!("{x}·β"),
                _ => format!("{x}·β{}", superscript(d)),
            });
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// An `r × n` matrix of β-weights; `entry(k, j)` uses 0-based positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightMatrix {
    r: usize,
    n: usize,
    entries: Vec<BetaWeight>,
}

impl WeightMatrix {
    pub fn new(r: usize, n: usize, entries: Vec<BetaWeight>) -> Result<Self> {
        if r == 0 || n == 0 || entries.len() != r * n {
            return Err(Error::invalid(format!("weight matrix needs {r}x{n} entries, got {}", entries.len())));
        }
        Ok(Self { r, n, entries })
    }

    /// The matrix `M_{a,ℓ}` with `r` rows and `n = |a|` columns.
    pub fn block_diagonal(a: &Composition, ell: usize, r: usize) -> Result<Self> {
        let n = a.n();
        if r < 2 || r > n {
            return Err(Error::invalid(format!("need 2 <= r <= n, got r = {r}, n = {n}")));
        }
        if r > MAX_R {
            return Err(Error::SizeLimit(format!("r = {r} exceeds {MAX_R}")));
        }
        if ell < 2 || ell > r {
            return Err(Error::invalid(format!("need 2 <= ell <= r, got ell = {ell}, r = {r}")));
        }
        let mut entries = Vec::with_capacity(r * n);
        for k in 1..=r {
            for j in 1..=n {
                let w = if k == 1 {
                    BetaWeight::ZERO
                } else if k == ell {
                    let b = a.block_of(j);
                    let v = a.alpha(b) + a.alpha(b - 1) + 1 - j;
                    BetaWeight::monomial(v as i64, ell - 2)
                } else {
                    BetaWeight::monomial((n + 1 - j) as i64, k - 2)
                };
                entries.push(w);
            }
        }
        Ok(Self { r, n, entries })
    }

    /// A matrix with plain integer entries (all at `β^0`).
    pub fn from_integer_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let r = rows.len();
        let n = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|row| row.len() != n) {
            return Err(Error::invalid("ragged weight matrix"));
        }
        let entries = rows.iter().flatten().map(|&x| BetaWeight::monomial(x, 0)).collect();
        Self::new(r, n, entries)
    }

    /// Rebuilds from `tensor[k][j][d]` = coefficient of `β^d` at `(k, j)`.
    pub fn from_tensor(tensor: &[Vec<Vec<i64>>]) -> Result<Self> {
        let r = tensor.len();
        let n = tensor.first().map_or(0, |x| x.len());
        let mut entries = Vec::with_capacity(r * n);
        for row in tensor {
            if row.len() != n {
                return Err(Error::invalid("ragged weight tensor"));
            }
            for e in row {
                entries.push(BetaWeight::from_coeffs(e)?);
            }
        }
        Self::new(r, n, entries)
    }

    pub fn to_tensor(&self) -> Vec<Vec<Vec<i64>>> {
        let len = self.r.saturating_sub(1).max(1);
        (0..self.r)
            .map(|k| (0..self.n).map(|j| self.entry(k, j).coeffs(len)).collect())
            .collect()
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, k: usize, j: usize) -> BetaWeight {
        self.entries[k * self.n + j]
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.r, self.n)
    }

    /// Column `j` of the result is column `theta[j]` of `self` (1-based images).
    pub fn permute_columns(&self, theta: &[usize]) -> Result<WeightMatrix> {
        let mut seen = vec![false; self.n + 1];
        if theta.len() != self.n {
            return Err(Error::invalid("column permutation has the wrong length"));
        }
        for &t in theta {
            if t == 0 || t > self.n || seen[t] {
                return Err(Error::invalid(format!("not a permutation of [{}]: {theta:?}", self.n)));
            }
            seen[t] = true;
        }
        let mut entries = Vec::with_capacity(self.entries.len());
        for k in 0..self.r {
            for &t in theta {
                entries.push(self.entry(k, t - 1));
            }
        }
        Ok(Self { r: self.r, n: self.n, entries })
    }

    /// Numeric matrix at a concrete β.
    pub fn evaluate(&self, beta: i128) -> Vec<Vec<i128>> {
        (0..self.r).map(|k| (0..self.n).map(|j| self.entry(k, j).eval(beta)).collect()).collect()
    }

    /// Sum of the entry weights of `mono`, counted with multiplicity.
    pub fn monomial_weight(&self, grid: &Grid, mono: &XMonomial) -> BetaWeight {
        let mut w = BetaWeight::ZERO;
        for (k, j, e) in mono.iter(grid) {
            w += self.entry(k, j).scaled(e as i64);
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_of_worked_example_at_beta_100() {
        let a: Composition = "2,2,3,2".parse().unwrap();
        let m = WeightMatrix::block_diagonal(&a, 3, 4).unwrap().evaluate(100);
        assert_eq!(m[0], vec![0; 9]);
        assert_eq!(m[1], (1..=9).rev().collect::<Vec<i128>>());
        assert_eq!(m[2], vec![200, 100, 400, 300, 700, 600, 500, 900, 800]);
        assert_eq!(m[3], (1..=9).rev().map(|x| x * 10000).collect::<Vec<i128>>());
    }

    #[test]
    fn matrix_with_ell_two() {
        let a: Composition = "2,4".parse().unwrap();
        let m = WeightMatrix::block_diagonal(&a, 2, 3).unwrap().evaluate(10);
        assert_eq!(m, vec![vec![0; 6], vec![2, 1, 6, 5, 4, 3], vec![60, 50, 40, 30, 20, 10]]);
    }

    #[test]
    fn single_block_is_diagonal() {
        let a = Composition::new(vec![7]).unwrap();
        for ell in 2..=4 {
            let m = WeightMatrix::block_diagonal(&a, ell, 4).unwrap();
            for k in 1..4 {
                for j in 0..7 {
                    assert_eq!(m.entry(k, j), BetaWeight::monomial(7 - j as i64, k - 1));
                }
            }
        }
    }

    #[test]
    fn rejects_bad_ell() {
        let a: Composition = "3,3".parse().unwrap();
        assert!(WeightMatrix::block_diagonal(&a, 4, 3).is_err());
        assert!(WeightMatrix::block_diagonal(&a, 1, 3).is_err());
    }

    #[test]
    fn dominant_power_decides() {
        assert_eq!(compare_weights(&[0, 1], &[999, 0]).unwrap(), Ordering::Greater);
        assert_eq!(compare_weights(&[3, 4], &[3, 4]).unwrap(), Ordering::Equal);
        assert!(compare_weights(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn display_forms() {
        assert_eq!(BetaWeight::monomial(9, 2).to_string(), "9·β²");
        assert_eq!(BetaWeight::from_coeffs(&[1, 6]).unwrap().to_string(), "1 + 6·β");
        assert_eq!(BetaWeight::ZERO.to_string(), "0");
    }

    #[test]
    fn column_permutation() {
        let a: Composition = "2,4".parse().unwrap();
        let m = WeightMatrix::block_diagonal(&a, 2, 3).unwrap();
        assert_eq!(m.permute_columns(&[1, 2, 3, 4, 5, 6]).unwrap(), m);
        let rev = m.permute_columns(&[6, 5, 4, 3, 2, 1]).unwrap();
        assert_eq!(rev.entry(2, 0), m.entry(2, 5));
        assert!(m.permute_columns(&[1, 1, 3, 4, 5, 6]).is_err());
    }
}
