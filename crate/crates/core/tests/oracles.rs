//! Checks against independent computations: numeric argmin at a large β,
//! Hilbert functions from the hook-content formula, and brute-force scans.

use std::collections::HashSet;

use bdmf::combinat::{enumerate_subsets, Composition};
use bdmf::poly::{PMonomial, PPoly, XMonomial};
use bdmf::sagbi::{check_witness, subduct, witness_search_deg2, Instance};
use bdmf::verify::{predict, Outcome};
use bdmf::{MatchingField, WeightMatrix};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// All permutations of `0..r` as slot -> position maps.
fn perms(r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in perms(r - 1) {
        for pos in 0..r {
            let mut q = p.clone();
            q.insert(pos, r - 1);
            out.push(q);
        }
    }
    out
}

/// The initial monomial of every maximal minor as a dense exponent vector,
/// found by minimizing the numeric weight at `beta`. Panics on ties.
fn numeric_initial_monomials(m: &WeightMatrix, beta: i128) -> Vec<Vec<u8>> {
    let (r, n) = (m.r(), m.n());
    let num = m.evaluate(beta);
    let all = perms(r);
    enumerate_subsets(r, n)
        .unwrap()
        .iter()
        .map(|s| {
            let e = s.elements();
            let mut scored: Vec<(i128, &Vec<usize>)> =
                all.iter().map(|p| ((0..r).map(|k| num[k][e[p[k]] as usize - 1]).sum(), p)).collect();
            scored.sort();
            assert!(scored.len() < 2 || scored[0].0 < scored[1].0, "numeric tie at {s}");
            let mut dense = vec![0u8; r * n];
            for k in 0..r {
                dense[k * n + e[scored[0].1[k]] as usize - 1] += 1;
            }
            dense
        })
        .collect()
}

/// Number of semistandard tableaux of the `r x d` rectangle with entries in `[n]`.
fn hilbert(r: usize, n: usize, d: usize) -> u64 {
    let mut num = BigUint::from(1u32);
    let mut den = BigUint::from(1u32);
    for i in 0..r {
        for j in 0..d {
            num *= (n + j - i) as u64;
            den *= ((d - j) + (r - i) - 1) as u64;
        }
    }
    let q: BigUint = num / den;
    q.try_into().unwrap()
}

fn distinct_products(cols: &[Vec<u8>], d: usize) -> usize {
    fn rec(cols: &[Vec<u8>], start: usize, left: usize, acc: &mut Vec<u8>, seen: &mut HashSet<Vec<u8>>) {
        if left == 0 {
            seen.insert(acc.clone());
            return;
        }
        for v in start..cols.len() {
            for (x, y) in acc.iter_mut().zip(&cols[v]) {
                *x += y;
            }
            rec(cols, v, left - 1, acc, seen);
            for (x, y) in acc.iter_mut().zip(&cols[v]) {
                *x -= y;
            }
        }
    }
    let mut seen = HashSet::new();
    rec(cols, 0, d, &mut vec![0; cols[0].len()], &mut seen);
    seen.len()
}

fn comp(s: &str) -> Composition {
    s.parse().unwrap()
}

const BIG_BETA: i128 = 1_000_000;

#[test]
fn hilbert_formula_small_cases() {
    assert_eq!(hilbert(2, 4, 1), 6);
    assert_eq!(hilbert(2, 4, 2), 20);
    assert_eq!(hilbert(3, 6, 1), 20);
    assert_eq!(hilbert(3, 6, 2), 175);
    assert_eq!(hilbert(4, 8, 2), 1764);
}

#[test]
fn closed_form_matches_numeric_argmin() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..60 {
        let n = rng.gen_range(6..=10);
        let r = rng.gen_range(3..=5.min(n - 1));
        let ell = rng.gen_range(2..=r);
        let all = Composition::all(n);
        let a = &all[rng.gen_range(0..all.len())];
        let m = WeightMatrix::block_diagonal(a, ell, r).unwrap();
        let mf = MatchingField::closed_form(a, ell, r).unwrap();
        let grid = m.grid().unwrap();
        let numeric = numeric_initial_monomials(&m, BIG_BETA);
        for (v, dense) in numeric.iter().enumerate() {
            let (_, x) = mf.initial_monomial(&grid, v);
            assert_eq!(&x.to_dense(&grid), dense, "a={a} ell={ell} r={r} index {}", mf.subsets()[v]);
        }
    }
}

/// The Plücker monomials form a SAGBI basis exactly when the products of the
/// initial monomials fill out the Hilbert function in every degree.
#[test]
fn hilbert_function_separates_sagbi_from_not() {
    let cases = [
        ("2,4", 3, 3, 3, true),
        ("6", 3, 3, 3, true),
        ("1,2,3", 3, 3, 3, true),
        ("3,2,3", 4, 4, 2, true),
        ("6,2", 4, 4, 2, false),
        ("5,2", 4, 4, 2, false),
    ];
    for (a, ell, r, top, sagbi) in cases {
        let a = comp(a);
        let m = WeightMatrix::block_diagonal(&a, ell, r).unwrap();
        let cols = numeric_initial_monomials(&m, BIG_BETA);
        let full = (1..=top).all(|d| distinct_products(&cols, d) as u64 == hilbert(r, a.n(), d));
        assert_eq!(full, sagbi, "a={a} ell={ell} r={r}");
        let inst = Instance::block_diagonal(&a, ell, r).unwrap();
        for d in 1..=top {
            assert_eq!(bdmf::toric::distinct_images(inst.exponents(), d).unwrap(), distinct_products(&cols, d));
        }
    }
}

#[test]
fn degree_two_shortfall_means_a_witness_exists() {
    for n in 7..=8 {
        for a in Composition::all(n) {
            let r = 4;
            let m = WeightMatrix::block_diagonal(&a, 4, r).unwrap();
            let cols = numeric_initial_monomials(&m, BIG_BETA);
            let short = (distinct_products(&cols, 2) as u64) < hilbert(r, n, 2);
            let inst = Instance::block_diagonal(&a, 4, r).unwrap();
            let w = witness_search_deg2(&inst).unwrap();
            assert_eq!(short, w.is_some(), "a={a}");
            if let Some(w) = w {
                check_witness(&inst, &w).unwrap();
            }
            if predict(&a, 4, r).unwrap().outcome == Outcome::NotSagbiByThm && a.len() > 1 {
                assert!(short, "a={a}");
            }
        }
    }
}

#[test]
fn semigroup_membership_matches_pair_scan() {
    let inst = Instance::block_diagonal(&comp("3,2,3"), 4, 4).unwrap();
    let em = inst.exponents();
    let grid = *inst.grid();
    let nv = em.num_vars();
    let mut products = HashSet::new();
    for i in 0..nv {
        for j in i..nv {
            products.insert(em.column(i).mul(em.column(j)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut hits = 0;
    for _ in 0..400 {
        // a product of two minors' monomials with one entry moved between rows
        let i = rng.gen_range(0..nv);
        let j = rng.gen_range(0..nv);
        let mut dense = em.column(i).mul(em.column(j)).to_dense(&grid);
        let k1 = rng.gen_range(0..4);
        let k2 = (k1 + rng.gen_range(1..4)) % 4;
        let c1: Vec<usize> = (0..grid.n).filter(|&c| dense[k1 * grid.n + c] > 0).collect();
        let c2: Vec<usize> = (0..grid.n).filter(|&c| dense[k2 * grid.n + c] > 0).collect();
        let (x, y) = (c1[rng.gen_range(0..c1.len())], c2[rng.gen_range(0..c2.len())]);
        dense[k1 * grid.n + x] -= 1;
        dense[k2 * grid.n + y] -= 1;
        dense[k1 * grid.n + y] += 1;
        dense[k2 * grid.n + x] += 1;
        let e = XMonomial::from_dense(&grid, &dense).unwrap();
        let member = em.semigroup_member(&e, 2);
        assert_eq!(member.is_some(), products.contains(&e));
        if let Some(f) = member {
            hits += 1;
            assert_eq!(em.image(&PMonomial::new(f)), e);
        }
    }
    assert!(hits > 0);
}

#[test]
fn random_algebra_elements_subduct_to_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for a in ["2,4", "1,2,3", "3,3"] {
        let inst = Instance::block_diagonal(&comp(a), 3, 3).unwrap();
        let nv = inst.ring().num_vars();
        for _ in 0..5 {
            let mut h = PPoly::zero();
            for _ in 0..6 {
                let deg = rng.gen_range(1..=3);
                let m = PMonomial::new((0..deg).map(|_| rng.gen_range(0..nv) as u16).collect());
                h.add_term(m, rng.gen_range(-5..=5)).unwrap();
            }
            if h.is_zero() {
                continue;
            }
            let s = subduct(&inst, &h).unwrap();
            assert!(s.trace.is_zero(), "a={a} h={}", h.display(inst.ring().subsets()));
        }
    }
}

#[test]
fn three_term_relations_vanish() {
    let inst = Instance::block_diagonal(&comp("2,4"), 3, 3).unwrap();
    let ring = inst.ring();
    // P_{13x}P_{24x} = P_{12x}P_{34x} + P_{14x}P_{23x} for a common element x
    for x in 5..=6 {
        let h = ring
            .parse(&format!("P[1,3,{x}]*P[2,4,{x}] - P[1,2,{x}]*P[3,4,{x}] - P[1,4,{x}]*P[2,3,{x}]"))
            .unwrap();
        assert!(ring.apply_psi(&h, ring.default_cap()).unwrap().is_zero());
    }
}
