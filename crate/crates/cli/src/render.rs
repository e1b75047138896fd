//! Text, CSV and LaTeX renderings shared by the subcommands and `repro`.

use std::fmt::Write as _;

use bdmf::combinat::{type_and_block, Composition, PluckerIndex, Tableau};
use bdmf::poly::{leading_term, LeadingTerm, PPoly};
use bdmf::sagbi::{Instance, SagbiCertificate, Witness};
use bdmf::verify::{SweepReport, SweepRow};
use bdmf::{MatchingField, Result, WeightMatrix};
use serde::Serialize;

fn aligned(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..cols).map(|j| rows.iter().filter_map(|r| r.get(j)).map(|s| s.chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(j, s)| format!("{}{s}", " ".repeat(widths[j] - s.chars().count())))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// The matrix with entries as polynomials in `β`, or evaluated.
pub fn matrix_text(m: &WeightMatrix, beta: Option<i128>) -> String {
    let rows: Vec<Vec<String>> = match beta {
        Some(b) => m.evaluate(b).iter().map(|row| row.iter().map(|x| x.to_string()).collect()).collect(),
        None => (0..m.r()).map(|k| (0..m.n()).map(|j| m.entry(k, j).to_string()).collect()).collect(),
    };
    aligned(&rows)
}

#[derive(Serialize)]
pub struct MatrixJson {
    pub r: usize,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<Composition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    /// `tensor[k][j][d]` is the coefficient of `β^d` in entry `(k, j)`.
    pub tensor: Vec<Vec<Vec<i64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<i128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluated: Option<Vec<Vec<i128>>>,
}

#[derive(Serialize)]
pub struct MfRow {
    pub index: PluckerIndex,
    pub perm: String,
    pub images: Vec<u8>,
    #[serde(rename = "type", skip_serializing_if = "Option::is_none")]
    pub kind: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block: Option<usize>,
    pub column: Vec<u8>,
}

pub fn mf_rows(mf: &MatchingField, a: Option<&Composition>) -> Result<Vec<MfRow>> {
    mf.subsets()
        .iter()
        .zip(mf.perms())
        .map(|(s, p)| {
            let tb = a.map(|a| type_and_block(s, a)).transpose()?;
            Ok(MfRow {
                index: s.clone(),
                perm: p.cycle_notation(),
                images: p.images().to_vec(),
                kind: tb.map(|(_, b)| b),
                block: tb.map(|(q, _)| q),
                column: p.arrange(s),
            })
        })
        .collect()
}

pub fn mf_text(rows: &[MfRow]) -> String {
    let dash = || "-".to_string();
    let mut table = vec![vec!["I".into(), "Λ(I)".into(), "type".into(), "block".into(), "T_I".into()]];
    for row in rows {
        table.push(vec![
            row.index.to_string(),
            row.perm.clone(),
            row.kind.map_or_else(dash, |x| x.to_string()),
            row.block.map_or_else(dash, |x| x.to_string()),
            Tableau::new(vec![row.column.clone()]).map(|t| t.to_string()).unwrap_or_default(),
        ]);
    }
    aligned(&table)
}

pub fn mf_csv(rows: &[MfRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| bdmf::Error::Io(e.to_string());
    w.write_record(["index", "perm", "type", "block", "column"]).map_err(io)?;
    for row in rows {
        let col: Vec<String> = row.column.iter().map(|x| x.to_string()).collect();
        w.write_record([
            row.index.to_string(),
            row.perm.clone(),
            row.kind.map(|x| x.to_string()).unwrap_or_default(),
            row.block.map(|x| x.to_string()).unwrap_or_default(),
            col.join(" "),
        ])
        .map_err(io)?;
    }
    finish_csv(w)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| bdmf::Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| bdmf::Error::Io(e.to_string()))
}

/// The initial term of `ψ(h)` and how it relates to the Plücker monomials.
#[derive(Serialize)]
pub struct InitialReport {
    pub h: String,
    pub coeff: i128,
    pub monomial: String,
    pub weight: String,
    pub weight_unique: bool,
    /// Columns drawn from one term of `h` whose tableau has the initial monomial.
    pub tableau: Option<Tableau>,
    /// Minors whose initial monomials multiply to the initial term, if any.
    pub factorization: Option<Vec<PluckerIndex>>,
    pub factorization_tableau: Option<Tableau>,
}

pub fn initial_report(inst: &Instance, h: &PPoly) -> Result<InitialReport> {
    let ring = inst.ring();
    let grid = inst.grid();
    let cap = grid.r * h.max_degree().max(1);
    let image = ring.apply_psi(h, cap)?;
    let LeadingTerm { coeff, mono, weight, weight_unique } = leading_term(inst.matrix(), grid, &image)?;
    let tableau = h.terms().find_map(|(m, _)| ring.realize_tableau(&mono, &ring.factors(m)));
    let degree = mono.degree() as usize / grid.r;
    let factorization = inst
        .exponents()
        .semigroup_member(&mono, degree)
        .map(|vars| vars.iter().map(|&v| ring.subsets()[v as usize].clone()).collect::<Vec<_>>());
    let factorization_tableau = match &factorization {
        Some(f) => Some(inst.field().tableau_of(f)?),
        None => None,
    };
    Ok(InitialReport {
        h: h.display(ring.subsets()),
        coeff,
        monomial: mono.display(grid),
        weight: weight.to_string(),
        weight_unique,
        tableau,
        factorization,
        factorization_tableau,
    })
}

fn indices(v: &[PluckerIndex]) -> String {
    let parts: Vec<String> = v.iter().map(|s| s.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

pub fn initial_text(rep: &InitialReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "h            = {}", rep.h);
    let _ = writeln!(s, "initial term = {} * {}", rep.coeff, rep.monomial);
    let _ = writeln!(s, "weight       = {}{}", rep.weight, if rep.weight_unique { "" } else { " (shared)" });
    if let Some(t) = &rep.tableau {
        let _ = writeln!(s, "tableau      = {t}");
    }
    match (&rep.factorization, &rep.factorization_tableau) {
        (Some(f), Some(t)) => {
            let _ = writeln!(s, "factors as   = {} with tableau {t}", indices(f));
        }
        _ => {
            let _ = writeln!(s, "factors as   = none (not a product of initial monomials)");
        }
    }
    s
}

pub fn witness_text(w: &Witness, latex: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "h            = {}", w.h_text);
    let cells: Vec<String> = w
        .stuck
        .iter()
        .map(|[k, j, e]| if *e == 1 { format!("x[{k},{j}]") } else { format!("x[{k},{j}]^{e}") })
        .collect();
    let _ = writeln!(s, "initial term = {} * {}", w.stuck_coeff, cells.join("*"));
    let _ = writeln!(s, "terms of ψ(h) = {}", w.image_terms);
    if let Some(t) = &w.tableau {
        let _ = writeln!(s, "tableau      = {t}");
        if latex {
            let _ = writeln!(s, "{}", t.to_latex());
        }
    }
    let _ = writeln!(
        s,
        "every factorization must cover cell ({},{}); candidates {} all fail",
        w.branch_cell[0],
        w.branch_cell[1],
        indices(&w.branch_candidates)
    );
    s
}

pub fn certificate_text(cert: &SagbiCertificate, latex: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", cert.parameters);
    let _ = writeln!(s, "mode       {}", cert.mode);
    let _ = writeln!(s, "verdict    {}", cert.verdict);
    let _ = writeln!(s, "relations  {} lifted", cert.traces.len());
    if let Some(b) = &cert.toric_basis {
        let _ = writeln!(s, "toric basis {} binomials, max degree {}", b.generators.len(), b.max_degree());
    }
    if let Some(w) = &cert.witness {
        s.push_str(&witness_text(w, latex));
    }
    if let Some(ms) = cert.wall_time_ms {
        let _ = writeln!(s, "wall time  {ms} ms");
    }
    s
}

fn interior_text(row: &SweepRow) -> String {
    let parts: Vec<String> =
        row.prediction.interior.iter().map(|b| format!("{}:{}:{}", b.i, b.size, b.tail)).collect();
    parts.join(" ")
}

pub fn sweep_text(rep: &SweepReport) -> String {
    let mut table = vec![vec![
        "Gr".to_string(),
        "a".into(),
        "ell".into(),
        "prediction".into(),
        "verdict".into(),
        "agree".into(),
    ]];
    for row in &rep.rows {
        table.push(vec![
            format!("Gr({},{})", row.r, row.n),
            row.a.to_string(),
            row.ell.to_string(),
            row.prediction.outcome.to_string(),
            row.verdict.to_string(),
            if row.agree { "yes".into() } else { "NO".into() },
        ]);
    }
    let mut s = aligned(&table);
    let m = &rep.summary;
    let _ = writeln!(
        s,
        "{} instances: {} SAGBI, {} NOT_SAGBI, {} undecided; {} open rows; {} disagreements",
        m.instances, m.sagbi, m.not_sagbi, m.undecided, m.open_rows, m.disagreements
    );
    s
}

pub fn sweep_csv(rep: &SweepReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| bdmf::Error::Io(e.to_string());
    w.write_record([
        "r",
        "n",
        "a",
        "ell",
        "prediction",
        "verdict",
        "mode",
        "agree",
        "max_generator_degree",
        "reduced_from",
        "a1",
        "interior",
        "wall_time_ms",
    ])
    .map_err(io)?;
    for row in &rep.rows {
        w.write_record([
            row.r.to_string(),
            row.n.to_string(),
            row.a.to_string(),
            row.ell.to_string(),
            row.prediction.outcome.to_string(),
            row.verdict.to_string(),
            row.mode.to_string(),
            row.agree.to_string(),
            row.max_generator_degree.to_string(),
            row.reduced_from.as_ref().map(|a| a.to_string()).unwrap_or_default(),
            row.prediction.a1.to_string(),
            interior_text(row),
            row.wall_time_ms.map(|x| x.to_string()).unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    finish_csv(w)
}
