//! Predicted SAGBI status of block diagonal matching fields from the known
//! classification, and sweeps comparing predictions with computed verdicts.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinat::Composition;
use crate::error::{Error, Result};
use crate::sagbi::{sagbi_check, CheckOptions, Instance, Mode, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    SagbiByThm,
    NotSagbiByThm,
    /// `a_1 = 4`, no obstruction from the interior blocks.
    OpenI,
    /// `a_1 <= 3` and every interior block of size `>= 4` has tail sum exactly `r + 1`.
    OpenII,
    /// `a_1 <= 3`, the first interior block of size `>= 3` has size 3 and tail sum `>= r + 2`.
    OpenIII,
    /// Neither covered by a theorem nor by one of the three listed open cases.
    OpenUnlisted,
    /// `a_s = 1` with `ℓ >= 4`: outside the hypotheses of every criterion.
    OpenHypothesis,
    /// `r = 2` or `r = n - 2`; reduces to a smaller case.
    Reducible,
    /// `ℓ = 2`, classified elsewhere.
    PriorWork,
}

impl Outcome {
    pub fn is_open(&self) -> bool {
        matches!(
            self,
            Outcome::OpenI | Outcome::OpenII | Outcome::OpenIII | Outcome::OpenUnlisted | Outcome::OpenHypothesis
        )
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Outcome::SagbiByThm => "SAGBI_BY_THM",
            Outcome::NotSagbiByThm => "NOT_SAGBI_BY_THM",
            Outcome::OpenI => "OPEN_I",
            Outcome::OpenII => "OPEN_II",
            Outcome::OpenIII => "OPEN_III",
            Outcome::OpenUnlisted => "OPEN_UNLISTED",
            Outcome::OpenHypothesis => "OPEN_HYPOTHESIS",
            Outcome::Reducible => "REDUCIBLE",
            Outcome::PriorWork => "PRIOR_WORK",
        };
        f.write_str(s)
    }
}

/// An interior block `i` (1-based, `2 <= i <= s-1`) with its size and tail sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteriorBlock {
    pub i: usize,
    pub size: usize,
    pub tail: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub outcome: Outcome,
    pub citations: Vec<String>,
    /// Raw data the classification is read from.
    pub a1: usize,
    pub interior: Vec<InteriorBlock>,
}

/// Explanation used when refusing `r = 2` or `r = n - 2`.
pub const REDUCIBLE_NOTE: &str = "r = 2 and r = n-2 reduce to known cases (\"we do not need to discuss the case r=2\"); \
     by duality only 3 <= r <= n-3 is considered";

/// Classifies `Λ_{a,ℓ}` on `Gr(r, |a|)`.
pub fn predict(a: &Composition, ell: usize, r: usize) -> Result<Prediction> {
    let n = a.n();
    if ell < 2 || ell > r {
        return Err(Error::invalid(format!("need 2 <= ell <= r, got ell = {ell}, r = {r}")));
    }
    let s = a.len();
    let interior: Vec<InteriorBlock> =
        (2..s).map(|i| InteriorBlock { i, size: a.parts()[i - 1], tail: a.tail_sum(i) }).collect();
    let a1 = a.parts()[0];
    let make = |outcome, cites: &[&str]| Prediction {
        outcome,
        citations: cites.iter().map(|c| c.to_string()).collect(),
        a1,
        interior: interior.clone(),
    };
    if r == 2 || r + 2 == n {
        return Ok(make(Outcome::Reducible, &[]));
    }
    if r < 2 || r + 2 > n {
        return Err(Error::invalid(format!("need 3 <= r <= n-3, got r = {r}, n = {n}")));
    }
    if ell == 2 {
        return Ok(make(Outcome::PriorWork, &[]));
    }
    if ell == 3 {
        return Ok(make(Outcome::SagbiByThm, &["ell = 3: SAGBI for every composition"]));
    }
    if s == 1 {
        return Ok(make(Outcome::SagbiByThm, &["single block: the diagonal matching field"]));
    }
    if a.parts()[s - 1] < 2 {
        return Ok(make(Outcome::OpenHypothesis, &["criteria require a_s >= 2"]));
    }
    let positive = a1 <= 3 && interior.iter().all(|b| b.size < 3 || r >= b.tail);
    if positive {
        return Ok(make(
            Outcome::SagbiByThm,
            &["ell >= 4 positive criterion: a_1 <= 3 and r >= tail sum at interior blocks of size >= 3"],
        ));
    }
    if a1 >= 5 {
        return Ok(make(Outcome::NotSagbiByThm, &["ell >= 4 obstruction: a_1 >= 5"]));
    }
    if interior.iter().any(|b| b.size >= 4 && r + 2 <= b.tail) {
        return Ok(make(
            Outcome::NotSagbiByThm,
            &["ell >= 4 obstruction: interior block of size >= 4 with tail sum >= r + 2"],
        ));
    }
    if a1 == 4 {
        return Ok(make(Outcome::OpenI, &["open case (i)"]));
    }
    let first_big = interior.iter().find(|b| b.size >= 3);
    if let Some(b) = first_big {
        if b.size == 3 && b.tail >= r + 2 {
            return Ok(make(Outcome::OpenIII, &["open case (iii)"]));
        }
    }
    if interior.iter().filter(|b| b.size >= 4).all(|b| b.tail == r + 1) {
        return Ok(make(Outcome::OpenII, &["open case (ii)"]));
    }
    Ok(make(Outcome::OpenUnlisted, &[]))
}

/// `a' = (1, a_1 - 1, a_2, …, a_s)`, which gives the same SAGBI status when `a_1 <= ℓ`.
pub fn reduce_a1(a: &Composition, ell: usize) -> Result<Composition> {
    let a1 = a.parts()[0];
    if a1 > ell {
        return Err(Error::NotApplicable(format!("a_1 = {a1} exceeds ell = {ell}")));
    }
    if a1 == 1 {
        return Ok(a.clone());
    }
    let mut parts = vec![1, a1 - 1];
    parts.extend_from_slice(&a.parts()[1..]);
    Composition::new(parts)
}

/// Instances to sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepGrid {
    /// `(r, n)` pairs, each with `3 <= r <= n-3`.
    pub shapes: Vec<(usize, usize)>,
    /// Values of `ℓ`; `None` means `3..=r`.
    pub ells: Option<Vec<usize>>,
    /// Skip compositions with `a_s = 1`.
    pub last_part_at_least_two: bool,
}

impl SweepGrid {
    /// All `(r, n, a, ℓ)` in canonical order.
    pub fn instances(&self) -> Result<Vec<(usize, usize, Composition, usize)>> {
        let mut out = Vec::new();
        for &(r, n) in &self.shapes {
            if r == 2 || r + 2 == n {
                return Err(Error::invalid(format!("refusing Gr({r},{n}): {REDUCIBLE_NOTE}")));
            }
            if r < 3 || r + 3 > n {
                return Err(Error::invalid(format!("Gr({r},{n}) is outside 3 <= r <= n-3")));
            }
            let ells: Vec<usize> = match &self.ells {
                Some(v) => v.iter().copied().filter(|&l| l >= 2 && l <= r).collect(),
                None => (3..=r).collect(),
            };
            for &ell in &ells {
                for a in Composition::all(n) {
                    if self.last_part_at_least_two && *a.parts().last().unwrap() < 2 {
                        continue;
                    }
                    out.push((r, n, a, ell));
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: usize,
    pub n: usize,
    pub a: Composition,
    pub ell: usize,
    pub prediction: Prediction,
    pub verdict: Verdict,
    pub mode: Mode,
    pub agree: bool,
    /// Largest degree among the lifted relations.
    pub max_generator_degree: usize,
    /// Set when the verdict was copied from the equivalent composition `a'`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced_from: Option<Composition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub instances: usize,
    pub sagbi: usize,
    pub not_sagbi: usize,
    pub undecided: usize,
    pub disagreements: usize,
    pub open_rows: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

impl SweepReport {
    pub fn disagreements(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| !r.agree)
    }

    pub fn open_rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.prediction.outcome.is_open())
    }
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub mode: Mode,
    pub check: CheckOptions,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Reuse the verdict of `a' = (1, a_1 - 1, …)` when `2 <= a_1 <= ℓ`.
    pub dedup: bool,
}

/// A theorem prediction contradicted by a computation.
pub fn contradicts(outcome: Outcome, verdict: &Verdict) -> bool {
    match outcome {
        Outcome::SagbiByThm => verdict.is_not_sagbi(),
        Outcome::NotSagbiByThm => verdict.is_sagbi(),
        _ => false,
    }
}

fn run_one(r: usize, n: usize, a: &Composition, ell: usize, opts: &SweepOptions) -> Result<SweepRow> {
    let start = Instant::now();
    let prediction = predict(a, ell, r)?;
    debug_assert_eq!(a.n(), n);
    let inst = Instance::block_diagonal(a, ell, r)?;
    let cert = sagbi_check(&inst, opts.mode, &opts.check)?;
    let max_generator_degree = cert.generators.iter().map(|g| g.degree()).max().unwrap_or(0);
    Ok(SweepRow {
        r,
        n,
        a: a.clone(),
        ell,
        agree: !contradicts(prediction.outcome, &cert.verdict),
        prediction,
        verdict: cert.verdict,
        mode: opts.mode,
        max_generator_degree,
        reduced_from: None,
        wall_time_ms: opts.check.timing.then(|| start.elapsed().as_millis() as u64),
    })
}

/// Predicts and computes every instance of the grid. Per-instance resource
/// limits show up as undecided verdicts, not errors.
pub fn sweep(grid: &SweepGrid, opts: &SweepOptions) -> Result<SweepReport> {
    let instances = grid.instances()?;
    let is_reduced = |a: &Composition, ell: usize| opts.dedup && a.parts()[0] >= 2 && a.parts()[0] <= ell;
    let work = || -> Result<Vec<Option<SweepRow>>> {
        instances
            .par_iter()
            .map(|(r, n, a, ell)| {
                if is_reduced(a, *ell) {
                    Ok(None)
                } else {
                    run_one(*r, *n, a, *ell, opts).map(Some)
                }
            })
            .collect()
    };
    let computed = match opts.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::invalid(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    let mut rows: Vec<SweepRow> = Vec::with_capacity(instances.len());
    for ((r, n, a, ell), row) in instances.iter().zip(computed) {
        let row = match row {
            Some(row) => row,
            None => {
                let a2 = reduce_a1(a, *ell)?;
                let source = rows
                    .iter()
                    .find(|x| x.r == *r && x.n == *n && x.ell == *ell && x.a == a2)
                    .cloned()
                    .map_or_else(|| run_one(*r, *n, &a2, *ell, opts), Ok)?;
                let prediction = predict(a, *ell, *r)?;
                SweepRow {
                    r: *r,
                    n: *n,
                    a: a.clone(),
                    ell: *ell,
                    agree: !contradicts(prediction.outcome, &source.verdict),
                    prediction,
                    verdict: source.verdict.clone(),
                    mode: opts.mode,
                    max_generator_degree: source.max_generator_degree,
                    reduced_from: Some(a2),
                    wall_time_ms: None,
                }
            }
        };
        rows.push(row);
    }
    let mut summary = SweepSummary { instances: rows.len(), ..Default::default() };
    for row in &rows {
        match row.verdict {
            Verdict::Sagbi { .. } => summary.sagbi += 1,
            Verdict::NotSagbi => summary.not_sagbi += 1,
            Verdict::Undecided { .. } => summary.undecided += 1,
        }
        summary.disagreements += !row.agree as usize;
        summary.open_rows += row.prediction.outcome.is_open() as usize;
    }
    Ok(SweepReport { rows, summary })
}
