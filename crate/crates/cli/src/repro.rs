//! Named reproductions of the worked examples.

use std::fmt::Write as _;

use bdmf::sagbi::{check_witness, sagbi_check, witness_of, CheckOptions, Instance, Mode};
use bdmf::{Composition, Error, PluckerIndex, Result, WeightMatrix};

use crate::render;

pub const TARGETS: &[&str] = &["ex3.5", "ex3.6", "sec3.3", "ex4.2", "ex4.3", "ex5.2", "ex5.3", "ex5.4"];

fn comp(s: &str) -> Composition {
    s.parse().expect("valid composition literal")
}

fn header(a: &Composition, ell: usize, r: usize) -> String {
    format!("Λ_{{{a},{ell}}} on Gr({r},{})\n", a.n())
}

fn matrix_target(a: &str, ell: usize, r: usize, beta: i128) -> Result<String> {
    let a = comp(a);
    let m = WeightMatrix::block_diagonal(&a, ell, r)?;
    let mut s = format!("M_{{{a},{ell}}} on Gr({r},{})\n", a.n());
    s.push_str(&render::matrix_text(&m, None));
    let _ = writeln!(s, "at β = {beta}:");
    s.push_str(&render::matrix_text(&m, Some(beta)));
    Ok(s)
}

fn tableau_target() -> Result<String> {
    let a = comp("2,2,3,2");
    let inst = Instance::block_diagonal(&a, 3, 4)?;
    let mut s = header(&a, 3, 4);
    for i in ["1234", "1349", "5678", "5689"] {
        let idx: PluckerIndex = i.parse()?;
        let p = inst.field().perm(&idx)?;
        let t = inst.field().tableau_of(std::slice::from_ref(&idx))?;
        let _ = writeln!(s, "{idx} -> {:<8} T = {t}", p.cycle_notation());
    }
    Ok(s)
}

fn initial_target(a: &str, ell: usize, r: usize, h: &str) -> Result<String> {
    let a = comp(a);
    let inst = Instance::block_diagonal(&a, ell, r)?;
    let h = inst.ring().parse(h)?;
    let mut s = header(&a, ell, r);
    s.push_str(&render::initial_text(&render::initial_report(&inst, &h)?));
    Ok(s)
}

fn obstruction_target(a: &str, ell: usize, r: usize, h: &str) -> Result<String> {
    let a = comp(a);
    let inst = Instance::block_diagonal(&a, ell, r)?;
    let h = inst.ring().parse(h)?;
    let mut s = header(&a, ell, r);
    let w = witness_of(&inst, &h)?
        .ok_or_else(|| Error::ValidationFailure("the relation does not give an obstruction".into()))?;
    check_witness(&inst, &w)?;
    s.push_str(&render::witness_text(&w, true));
    let cert = sagbi_check(&inst, Mode::Fast { degree: 2 }, &CheckOptions::default())?;
    let _ = writeln!(s, "verdict      = {} ({} relations lifted)", cert.verdict, cert.traces.len());
    Ok(s)
}

pub fn run(target: &str) -> Result<String> {
    match target {
        "ex3.5" => matrix_target("2,2,3,2", 3, 4, 100),
        "ex3.6" => tableau_target(),
        "sec3.3" => {
            let mut s = matrix_target("2,4", 2, 3, 10)?;
            s.push_str(&initial_target("2,4", 2, 3, "P[1,3,5]*P[3,4,6] - P[1,3,6]*P[3,4,5]")?);
            Ok(s)
        }
        "ex4.2" => obstruction_target("6,2", 4, 4, "P[1,2,3,7]*P[4,5,6,8] - P[1,2,3,8]*P[4,5,6,7]"),
        "ex4.3" => obstruction_target("5,2", 4, 4, "P[1,2,3,6]*P[3,4,5,7] - P[1,2,3,7]*P[3,4,5,6]"),
        "ex5.2" => initial_target("3,2,3", 4, 4, "P[1,2,4,6]*P[2,3,5,8] - P[1,2,5,6]*P[2,3,4,8]"),
        // with a minus sign the two initial terms add up instead of cancelling
        "ex5.3" => initial_target("3,2,3", 4, 4, "P[2,6,7,8]*P[4,5,6,7] + P[5,6,7,8]*P[2,4,6,7]"),
        "ex5.4" => initial_target("2,2,2,4", 4, 5, "P[1,2,5,6,9]*P[3,4,5,7,8] - P[1,2,5,6,8]*P[3,4,5,7,9]"),
        _ => Err(Error::InvalidParameters(format!("unknown target {target:?}; known: {}", TARGETS.join(", ")))),
    }
}
