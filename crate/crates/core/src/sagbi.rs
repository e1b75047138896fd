//! Deciding whether the maximal minors form a SAGBI basis: subduction of
//! lifted relations, the degree-two witness search, and certificates that can
//! be re-checked independently.

use std::fmt;
use std::time::Instant;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::combinat::{Composition, PluckerIndex, Tableau};
use crate::error::{Error, Result};
use crate::matchfield::MatchingField;
use crate::poly::{Coeff, Grid, PMonomial, PPoly, PluckerRing, TermKey, XMonomial, XPoly, MAX_P_DEGREE};
use crate::toric::{
    degree_bounded_kernel, fibers, toric_basis, ExponentMatrix, SignedBinomial, ToricBasis, ToricCache, ToricCaps,
};
use crate::weights::{BetaWeight, WeightMatrix};

/// Version of the certificate JSON layout.
pub const FORMAT_VERSION: u32 = 1;

/// What defines an instance: either a block diagonal field `(a, ℓ)` or an
/// explicit weight matrix (entries as β-coefficient vectors).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameters {
    pub r: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Composition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<Vec<i64>>>>,
}

impl fmt::Display for Parameters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.a, self.ell) {
            (Some(a), Some(ell)) => write!(f, "Gr({},{}) a={a} ell={ell}", self.r, self.n),
            _ => write!(f, "Gr({},{}) explicit matrix", self.r, self.n),
        }
    }
}

/// A weight matrix, its coherent matching field, and the precomputed data
/// used by every decision procedure.
#[derive(Clone, Debug)]
pub struct Instance {
    params: Parameters,
    matrix: WeightMatrix,
    field: MatchingField,
    ring: PluckerRing,
    em: ExponentMatrix,
    wdet: Vec<Vec<(XMonomial, i8, BetaWeight)>>,
}

impl Instance {
    /// `Λ_{a,ℓ}` on `Gr(r, |a|)`.
    pub fn block_diagonal(a: &Composition, ell: usize, r: usize) -> Result<Self> {
        let matrix = WeightMatrix::block_diagonal(a, ell, r)?;
        let field = MatchingField::closed_form(a, ell, r)?;
        let params = Parameters { r, n: a.n(), a: Some(a.clone()), ell: Some(ell), matrix: None };
        Self::assemble(params, matrix, field)
    }

    /// The field induced by an arbitrary weight matrix; it must be coherent.
    pub fn from_matrix(matrix: WeightMatrix) -> Result<Self> {
        let field = MatchingField::induce_from_matrix(&matrix)?;
        if let Some(t) = field.tie() {
            return Err(Error::NotApplicable(format!(
                "matrix does not induce a coherent matching field: {} is minimized by {} and {}",
                t.index, t.first, t.second
            )));
        }
        let params = Parameters { r: matrix.r(), n: matrix.n(), a: None, ell: None, matrix: Some(matrix.to_tensor()) };
        Self::assemble(params, matrix, field)
    }

    pub fn from_parameters(p: &Parameters) -> Result<Self> {
        let inst = match (&p.a, p.ell, &p.matrix) {
            (Some(a), Some(ell), None) => Self::block_diagonal(a, ell, p.r)?,
            (None, None, Some(m)) => Self::from_matrix(WeightMatrix::from_tensor(m)?)?,
            _ => return Err(Error::invalid("parameters need either (a, ell) or a matrix")),
        };
        if inst.params.r != p.r || inst.params.n != p.n {
            return Err(Error::invalid("parameters are inconsistent"));
        }
        Ok(inst)
    }

    fn assemble(params: Parameters, matrix: WeightMatrix, field: MatchingField) -> Result<Self> {
        let ring = PluckerRing::new(params.r, params.n)?;
        let em = ExponentMatrix::new(&field, &matrix)?;
        let grid = *ring.grid();
        let wdet = (0..ring.num_vars())
            .map(|v| ring.det(v).iter().map(|t| (t.mono, t.sign, matrix.monomial_weight(&grid, &t.mono))).collect())
            .collect();
        Ok(Self { params, matrix, field, ring, em, wdet })
    }

    pub fn params(&self) -> &Parameters {
        &self.params
    }

    pub fn matrix(&self) -> &WeightMatrix {
        &self.matrix
    }

    pub fn field(&self) -> &MatchingField {
        &self.field
    }

    pub fn ring(&self) -> &PluckerRing {
        &self.ring
    }

    pub fn exponents(&self) -> &ExponentMatrix {
        &self.em
    }

    pub fn grid(&self) -> &Grid {
        self.ring.grid()
    }

    /// Key for the toric basis cache.
    pub fn cache_key(&self) -> String {
        let desc = serde_json::to_string(&self.params).expect("parameters serialize");
        ToricCache::key(&format!("toric-v{FORMAT_VERSION};{desc}"))
    }

    fn cells(&self, x: &XMonomial) -> Vec<[u8; 3]> {
        x.iter(self.grid()).map(|(k, j, e)| [k as u8 + 1, j as u8 + 1, e]).collect()
    }

    fn cells_monomial(&self, cells: &[[u8; 3]]) -> Result<XMonomial> {
        let g = self.grid();
        let mut dense = vec![0u8; g.vars()];
        for &[k, j, e] in cells {
            let (k, j) = (k as usize, j as usize);
            if k == 0 || j == 0 || k > g.r || j > g.n || e == 0 {
                return Err(Error::ValidationFailure(format!("bad cell ({k},{j})^{e}")));
            }
            dense[g.var(k - 1, j - 1)] = dense[g.var(k - 1, j - 1)].saturating_add(e);
        }
        XMonomial::from_dense(g, &dense).map_err(|e| Error::ValidationFailure(e.to_string()))
    }

    fn pterms(&self, h: &PPoly) -> Vec<PTerm> {
        h.terms().map(|(m, &c)| PTerm { coeff: c, factors: self.ring.factors(m) }).collect()
    }

    fn ppoly(&self, terms: &[PTerm]) -> Result<PPoly> {
        let mut h = PPoly::zero();
        for t in terms {
            h.add_term(self.ring.pmonomial(&t.factors)?, t.coeff)?;
        }
        Ok(h)
    }
}

/// A term of a Plücker polynomial in certificate form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PTerm {
    pub coeff: Coeff,
    pub factors: Vec<PluckerIndex>,
}

/// A matrix monomial as `[row, col, exponent]` triples, 1-based.
pub type Cells = Vec<[u8; 3]>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub lead: Cells,
    pub coeff: Coeff,
    /// Factorization of `lead` into initial monomials of minors.
    pub factors: Vec<PluckerIndex>,
    /// The subtracted element is `multiplier · ∏ det(x_I)`.
    pub multiplier: Coeff,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    Zero,
    Stuck { lead: Cells, coeff: Coeff, weight_unique: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubductionTrace {
    pub input: Vec<PTerm>,
    pub steps: Vec<TraceStep>,
    pub terminal: Terminal,
}

impl SubductionTrace {
    pub fn is_zero(&self) -> bool {
        self.terminal == Terminal::Zero
    }
}

/// The running polynomial of a subduction. Most of `ψ(h)` cancels, so the
/// initial term is found by a scan rather than by keeping a priority queue.
struct Subductor<'a> {
    inst: &'a Instance,
    terms: FxHashMap<XMonomial, (Coeff, BetaWeight)>,
}

impl<'a> Subductor<'a> {
    fn new(inst: &'a Instance) -> Self {
        Self { inst, terms: FxHashMap::default() }
    }

    /// Adds `coef · ψ(P^m)`.
    fn add(&mut self, m: &PMonomial, coef: Coeff) -> Result<()> {
        if m.degree() > MAX_P_DEGREE {
            return Err(Error::SizeLimit(format!("Plücker degree {} exceeds {MAX_P_DEGREE}", m.degree())));
        }
        let vars: Vec<usize> = m.vars().iter().map(|&v| v as usize).collect();
        let size = vars.iter().fold(1usize, |acc, &v| acc.saturating_mul(self.inst.wdet[v].len()));
        self.terms.reserve(size.min(1 << 20));
        self.expand(&vars, XMonomial::ONE, coef, BetaWeight::ZERO)
    }

    fn expand(&mut self, vars: &[usize], mono: XMonomial, coef: Coeff, w: BetaWeight) -> Result<()> {
        let Some((&v, rest)) = vars.split_first() else {
            return self.add_term(mono, coef, w);
        };
        let inst = self.inst;
        for &(x, s, tw) in &inst.wdet[v] {
            self.expand(rest, mono.mul(&x), if s > 0 { coef } else { -coef }, w + tw)?;
        }
        Ok(())
    }

    fn add_term(&mut self, mono: XMonomial, coef: Coeff, w: BetaWeight) -> Result<()> {
        match self.terms.get_mut(&mono) {
            Some(slot) => {
                slot.0 = slot.0.checked_add(coef).ok_or_else(|| Error::ResourceLimit("coefficient overflow".into()))?;
                if slot.0 == 0 {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, (coef, w));
            }
        }
        Ok(())
    }

    fn lead(&self) -> Option<(TermKey, XMonomial, Coeff)> {
        let mut best: Option<(BetaWeight, XMonomial, Coeff)> = None;
        for (x, &(c, w)) in &self.terms {
            let better = match &best {
                None => true,
                Some((bw, bx, _)) => w < *bw || (w == *bw && TermKey::new(w, x) < TermKey::new(w, bx)),
            };
            if better {
                best = Some((w, *x, c));
            }
        }
        best.map(|(w, x, c)| (TermKey::new(w, &x), x, c))
    }

    fn weight_unique(&self, lead: &XMonomial, w: BetaWeight) -> bool {
        !self.terms.iter().any(|(x, (_, tw))| x != lead && *tw == w)
    }

    fn image(&self) -> XPoly {
        let mut p = XPoly::zero();
        for (x, &(c, _)) in &self.terms {
            p.add_term(*x, c).expect("distinct monomials");
        }
        p
    }
}

/// The result of subducting `ψ(h)`.
#[derive(Clone, Debug)]
pub struct Subduction {
    pub trace: SubductionTrace,
    /// `h` minus everything subtracted; its image is what remains.
    pub remainder: PPoly,
    pub stuck_mono: Option<XMonomial>,
}

/// Subducts `ψ(h)` against the initial monomials of the minors.
///
/// Each step factors the initial term `c·x^e` as `∏ in(det x_I)` and subtracts
/// `c·∏ sgn(Λ(I)) · ∏ det(x_I)`, which cancels it exactly; the initial term
/// therefore strictly increases in the refined order, which is checked.
pub fn subduct(inst: &Instance, h: &PPoly) -> Result<Subduction> {
    let mut sd = Subductor::new(inst);
    for (m, &c) in h.terms() {
        sd.add(m, c)?;
    }
    let mut remainder = h.clone();
    let mut steps = Vec::new();
    let mut last: Option<TermKey> = None;
    let r = inst.grid().r;
    while let Some((key, mono, c)) = sd.lead() {
        if last.is_some_and(|l| key <= l) {
            return Err(Error::ValidationFailure("subduction failed to increase the initial term".into()));
        }
        last = Some(key);
        let degree = mono.degree() as usize / r;
        let Some(fact) = inst.em.semigroup_member(&mono, degree) else {
            let unique = sd.weight_unique(&mono, key.weight);
            let trace = SubductionTrace {
                input: inst.pterms(h),
                steps,
                terminal: Terminal::Stuck { lead: inst.cells(&mono), coeff: c, weight_unique: unique },
            };
            return Ok(Subduction { trace, remainder, stuck_mono: Some(mono) });
        };
        let pm = PMonomial::new(fact);
        let multiplier = c * inst.em.sign_of(&pm) as Coeff;
        sd.add(&pm, -multiplier)?;
        remainder.add_term(pm.clone(), -multiplier)?;
        steps.push(TraceStep { lead: inst.cells(&mono), coeff: c, factors: inst.ring.factors(&pm), multiplier });
    }
    Ok(Subduction {
        trace: SubductionTrace { input: inst.pterms(h), steps, terminal: Terminal::Zero },
        remainder,
        stuck_mono: None,
    })
}

/// Re-executes a trace without searching for factorizations.
pub fn replay_trace(inst: &Instance, trace: &SubductionTrace) -> Result<()> {
    let fail = |i: usize, msg: &str| Err(Error::ValidationFailure(format!("trace step {i}: {msg}")));
    let h = inst.ppoly(&trace.input)?;
    let mut sd = Subductor::new(inst);
    for (m, &c) in h.terms() {
        sd.add(m, c)?;
    }
    let mut last: Option<TermKey> = None;
    for (i, step) in trace.steps.iter().enumerate() {
        let Some((key, mono, c)) = sd.lead() else {
            return fail(i, "polynomial already vanished");
        };
        if last.is_some_and(|l| key <= l) {
            return fail(i, "initial term did not increase");
        }
        last = Some(key);
        if inst.cells_monomial(&step.lead)? != mono || step.coeff != c {
            return fail(i, "recorded initial term differs from the recomputed one");
        }
        let pm = inst.ring.pmonomial(&step.factors)?;
        if inst.em.image(&pm) != mono {
            return fail(i, "factorization does not multiply to the initial term");
        }
        if step.multiplier != c * inst.em.sign_of(&pm) as Coeff {
            return fail(i, "multiplier does not cancel the initial term");
        }
        sd.add(&pm, -step.multiplier)?;
    }
    let end = trace.steps.len();
    match (&trace.terminal, sd.lead()) {
        (Terminal::Zero, None) => Ok(()),
        (Terminal::Zero, Some(_)) => fail(end, "trace claims zero but terms remain"),
        (Terminal::Stuck { .. }, None) => fail(end, "trace claims a stuck term but the polynomial vanished"),
        (Terminal::Stuck { lead, coeff, weight_unique }, Some((key, mono, c))) => {
            if inst.cells_monomial(lead)? != mono || *coeff != c {
                return fail(end, "stuck term differs from the recomputed one");
            }
            if *weight_unique != sd.weight_unique(&mono, key.weight) {
                return fail(end, "uniqueness flag is wrong");
            }
            if inst.em.semigroup_member(&mono, mono.degree() as usize / inst.grid().r).is_some() {
                return fail(end, "stuck term factors into initial monomials");
            }
            Ok(())
        }
    }
}

/// Evidence that the minors are not a SAGBI basis: an element of the algebra
/// whose initial term is no product of initial terms of minors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub h: Vec<PTerm>,
    pub h_text: String,
    /// Number of terms of `ψ(h)`.
    pub image_terms: usize,
    /// All terms of `ψ(h)` as `(coefficient, cells)`, when small enough to store.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<Vec<(Coeff, Cells)>>,
    pub stuck: Cells,
    pub stuck_coeff: Coeff,
    pub weight_unique: bool,
    pub degree: usize,
    /// A tableau with monomial `stuck`, columns taken from one term of `h`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tableau: Option<Tableau>,
    /// Record of the exhaustive non-factorization search: the first-row cell
    /// every factorization must cover, and the minors that could cover it.
    pub branch_cell: [u8; 2],
    pub branch_candidates: Vec<PluckerIndex>,
}

const STORED_IMAGE_LIMIT: usize = 5000;

fn build_witness(inst: &Instance, h: &PPoly, image: &XPoly, stuck: XMonomial, coeff: Coeff, unique: bool) -> Witness {
    let grid = inst.grid();
    let degree = stuck.degree() as usize / grid.r;
    let stored = (image.len() <= STORED_IMAGE_LIMIT).then(|| {
        image.sorted_terms(&inst.matrix, grid).into_iter().map(|(x, c)| (c, inst.cells(&x))).collect()
    });
    let tableau = h.terms().find_map(|(m, _)| inst.ring.realize_tableau(&stuck, &inst.ring.factors(m)));
    let j = (0..grid.n).find(|&j| stuck.exponent(grid.var(0, j)) > 0).unwrap_or(0);
    let branch_candidates = (0..inst.em.num_vars())
        .filter(|&v| {
            let c = inst.em.column(v);
            c.exponent(grid.var(0, j)) > 0 && c.divides(&stuck)
        })
        .map(|v| inst.ring.subsets()[v].clone())
        .collect();
    Witness {
        h: inst.pterms(h),
        h_text: h.display(inst.ring.subsets()),
        image_terms: image.len(),
        image: stored,
        stuck: inst.cells(&stuck),
        stuck_coeff: coeff,
        weight_unique: unique,
        degree,
        tableau,
        branch_cell: [1, j as u8 + 1],
        branch_candidates,
    }
}

/// Re-derives a witness from scratch.
pub fn check_witness(inst: &Instance, w: &Witness) -> Result<()> {
    let fail = |msg: &str| Err(Error::ValidationFailure(format!("witness: {msg}")));
    let h = inst.ppoly(&w.h)?;
    let cap = inst.grid().r * h.max_degree().max(1);
    let image = inst.ring.apply_psi(&h, cap)?;
    if image.is_zero() {
        return fail("ψ(h) vanishes");
    }
    if image.len() != w.image_terms {
        return fail("term count of ψ(h) differs");
    }
    if let Some(stored) = &w.image {
        let mut p = XPoly::zero();
        for (c, cells) in stored {
            p.add_term(inst.cells_monomial(cells)?, *c)?;
        }
        if p != image {
            return fail("stored image differs from ψ(h)");
        }
    }
    let lead = crate::poly::leading_term(&inst.matrix, inst.grid(), &image)?;
    let stuck = inst.cells_monomial(&w.stuck)?;
    if lead.mono != stuck || lead.coeff != w.stuck_coeff {
        return fail("stuck term is not the initial term of ψ(h)");
    }
    if lead.weight_unique != w.weight_unique {
        return fail("uniqueness flag is wrong");
    }
    if !w.weight_unique {
        return fail("initial term is not the unique term of minimal weight");
    }
    if w.degree * inst.grid().r != stuck.degree() as usize {
        return fail("degree does not match the stuck term");
    }
    if inst.em.semigroup_member(&stuck, w.degree).is_some() {
        return fail("stuck term is a product of initial monomials");
    }
    if let Some(t) = &w.tableau {
        if XMonomial::from_tableau(inst.grid(), t)? != stuck {
            return fail("tableau does not match the stuck term");
        }
    }
    Ok(())
}

/// A witness built from `h` itself, when the initial term of `ψ(h)` is the
/// unique term of its weight and is not a product of initial monomials.
pub fn witness_of(inst: &Instance, h: &PPoly) -> Result<Option<Witness>> {
    let cap = inst.grid().r * h.max_degree().max(1);
    let image = inst.ring.apply_psi(h, cap)?;
    if image.is_zero() {
        return Ok(None);
    }
    let lead = crate::poly::leading_term(&inst.matrix, inst.grid(), &image)?;
    let degree = lead.mono.degree() as usize / inst.grid().r;
    if !lead.weight_unique || inst.em.semigroup_member(&lead.mono, degree).is_some() {
        return Ok(None);
    }
    Ok(Some(build_witness(inst, h, &image, lead.mono, lead.coeff, true)))
}

/// Searches degree two: for every pair of P-monomials with the same image,
/// the sign-matched difference cancels the common initial term; the initial
/// term of what remains must again factor. The first pair (in lexicographic
/// order) where it does not is returned as a witness.
pub fn witness_search_deg2(inst: &Instance) -> Result<Option<Witness>> {
    Ok(deg2_witnesses(inst, true)?.into_iter().next())
}

/// Every degree-two witness (one per offending pair), in lexicographic pair order.
pub fn all_deg2_witnesses(inst: &Instance) -> Result<Vec<Witness>> {
    deg2_witnesses(inst, false)
}

fn deg2_witnesses(inst: &Instance, first_only: bool) -> Result<Vec<Witness>> {
    let mut out = Vec::new();
    for f in fibers(&inst.em, 2)? {
        for i in 0..f.members.len() {
            for j in i + 1..f.members.len() {
                let (mi, mj) = (&f.members[i], &f.members[j]);
                let eps = (inst.em.sign_of(mi) * inst.em.sign_of(mj)) as Coeff;
                let mut h = PPoly::monomial(mi.clone(), 1);
                h.add_term(mj.clone(), -eps)?;
                let mut sd = Subductor::new(inst);
                sd.add(mi, 1)?;
                sd.add(mj, -eps)?;
                let Some((key, mono, c)) = sd.lead() else { continue };
                if inst.em.semigroup_member(&mono, 2).is_some() {
                    continue;
                }
                if !sd.weight_unique(&mono, key.weight) {
                    continue;
                }
                out.push(build_witness(inst, &h, &sd.image(), mono, c, true));
                if first_only {
                    return Ok(out);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    /// Full toric basis of `J_Λ`; positive verdicts are certified.
    Rigorous,
    /// Relations of degree at most `degree` only.
    Fast { degree: usize },
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Rigorous => f.write_str("rigorous"),
            Mode::Fast { degree } => write!(f, "fast(d={degree})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Sagbi { rigor: Rigor },
    NotSagbi,
    Undecided { reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rigor", rename_all = "snake_case")]
pub enum Rigor {
    Certified,
    DegreeBounded { degree: usize },
}

impl Verdict {
    pub fn is_sagbi(&self) -> bool {
        matches!(self, Verdict::Sagbi { .. })
    }

    pub fn is_not_sagbi(&self) -> bool {
        matches!(self, Verdict::NotSagbi)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Sagbi { rigor: Rigor::Certified } => f.write_str("SAGBI(certified)"),
            Verdict::Sagbi { rigor: Rigor::DegreeBounded { degree } } => {
                write!(f, "SAGBI(degree-bounded, d={degree})")
            }
            Verdict::NotSagbi => f.write_str("NOT_SAGBI"),
            Verdict::Undecided { reason } => write!(f, "UNDECIDED({reason})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SagbiCertificate {
    pub format_version: u32,
    pub tool_version: String,
    pub parameters: Parameters,
    pub mode: Mode,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Rigorous mode: the certified Gröbner basis of `J_Λ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toric_basis: Option<ToricBasis>,
    /// The relations that were lifted, in the order they were subducted.
    pub generators: Vec<SignedBinomial>,
    /// One trace per lifted relation (up to and including a stuck one).
    pub traces: Vec<SubductionTrace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

#[derive(Clone, Debug, Default)]
pub struct CheckOptions {
    pub caps: ToricCaps,
    pub cache: Option<ToricCache>,
    /// Record wall time in the certificate (breaks byte-identical output).
    pub timing: bool,
}

fn lift(g: &SignedBinomial) -> Result<PPoly> {
    let mut h = PPoly::monomial(g.u.clone(), 1);
    h.add_term(g.v.clone(), -(g.eps as Coeff))?;
    Ok(h)
}

/// Runs the lifting test over a generating set of `J_Λ` (all of it in
/// rigorous mode, degrees `<= d` in fast mode).
pub fn sagbi_check(inst: &Instance, mode: Mode, opts: &CheckOptions) -> Result<SagbiCertificate> {
    let start = Instant::now();
    let mut cert = SagbiCertificate {
        format_version: FORMAT_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        parameters: inst.params.clone(),
        mode,
        verdict: Verdict::Undecided { reason: "not run".into() },
        witness: None,
        toric_basis: None,
        generators: Vec::new(),
        traces: Vec::new(),
        wall_time_ms: None,
    };
    let generators = match mode {
        Mode::Rigorous => {
            let key = inst.cache_key();
            let cached = opts.cache.as_ref().and_then(|c| c.load(&key)).filter(|b| b.verify(&inst.em).is_ok());
            let basis = match cached {
                Some(b) => b,
                None => match toric_basis(&inst.em, opts.caps) {
                    Ok(b) => {
                        if let Some(c) = &opts.cache {
                            // a cache write failure only costs recomputation later
                            let _ = c.store(&key, &b);
                        }
                        b
                    }
                    Err(Error::ResourceLimit(msg)) => {
                        cert.verdict = Verdict::Undecided { reason: format!("resource limit: {msg}") };
                        return Ok(finish(cert, start, opts));
                    }
                    Err(e) => return Err(e),
                },
            };
            if !basis.certified {
                cert.verdict = Verdict::Undecided { reason: "toric basis failed Buchberger's criterion".into() };
                return Ok(finish(cert, start, opts));
            }
            let gens = basis.generators.clone();
            cert.toric_basis = Some(basis);
            gens
        }
        Mode::Fast { degree } => match degree_bounded_kernel(&inst.em, degree) {
            Ok(g) => g,
            Err(Error::ResourceLimit(msg)) => {
                cert.verdict = Verdict::Undecided { reason: format!("resource limit: {msg}") };
                return Ok(finish(cert, start, opts));
            }
            Err(e) => return Err(e),
        },
    };
    for g in &generators {
        g.check(&inst.em)?;
        let h = lift(g)?;
        let sub = subduct(inst, &h)?;
        let stuck = sub.stuck_mono;
        let unique = matches!(sub.trace.terminal, Terminal::Stuck { weight_unique: true, .. });
        let coeff = match &sub.trace.terminal {
            Terminal::Stuck { coeff, .. } => *coeff,
            Terminal::Zero => 0,
        };
        cert.traces.push(sub.trace);
        if let Some(mono) = stuck {
            cert.generators = generators[..cert.traces.len()].to_vec();
            if unique {
                let image = inst.ring.apply_psi(&sub.remainder, inst.grid().r * MAX_P_DEGREE)?;
                cert.witness = Some(build_witness(inst, &sub.remainder, &image, mono, coeff, true));
                cert.verdict = Verdict::NotSagbi;
            } else {
                cert.verdict = Verdict::Undecided { reason: "tie among minimal-weight terms".into() };
            }
            return Ok(finish(cert, start, opts));
        }
    }
    cert.generators = generators;
    cert.verdict = Verdict::Sagbi {
        rigor: match mode {
            Mode::Rigorous => Rigor::Certified,
            Mode::Fast { degree } => Rigor::DegreeBounded { degree },
        },
    };
    Ok(finish(cert, start, opts))
}

fn finish(mut cert: SagbiCertificate, start: Instant, opts: &CheckOptions) -> SagbiCertificate {
    if opts.timing {
        cert.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    }
    cert
}

/// Independent re-validation of a certificate. Returns the first failure.
pub fn check_certificate(cert: &SagbiCertificate) -> Result<()> {
    let fail = |msg: String| Err(Error::ValidationFailure(msg));
    if cert.format_version != FORMAT_VERSION {
        return fail(format!("unsupported format version {}", cert.format_version));
    }
    let inst = Instance::from_parameters(&cert.parameters)?;
    if cert.generators.len() != cert.traces.len() {
        return fail("one trace per generator is required".into());
    }
    for (g, t) in cert.generators.iter().zip(&cert.traces) {
        g.check(&inst.em)?;
        if inst.ppoly(&t.input)? != lift(g)? {
            return fail("trace input is not the lift of its generator".into());
        }
        replay_trace(&inst, t)?;
    }
    match &cert.verdict {
        Verdict::NotSagbi => {
            let Some(w) = &cert.witness else {
                return fail("NOT_SAGBI without a witness".into());
            };
            check_witness(&inst, w)
        }
        Verdict::Sagbi { rigor } => {
            if cert.witness.is_some() {
                return fail("SAGBI verdict carries a witness".into());
            }
            if !cert.traces.iter().all(|t| t.is_zero()) {
                return fail("SAGBI verdict with a stuck trace".into());
            }
            match (rigor, cert.mode) {
                (Rigor::Certified, Mode::Rigorous) => {
                    let Some(b) = &cert.toric_basis else {
                        return fail("certified verdict without a toric basis".into());
                    };
                    if !b.certified || b.generators != cert.generators {
                        return fail("toric basis does not match the lifted generators".into());
                    }
                    b.verify(&inst.em)
                }
                (Rigor::DegreeBounded { degree }, Mode::Fast { degree: d }) if *degree == d => {
                    if degree_bounded_kernel(&inst.em, d)? != cert.generators {
                        return fail("generators are not the degree-bounded kernel".into());
                    }
                    Ok(())
                }
                _ => fail("verdict rigor does not match the mode".into()),
            }
        }
        Verdict::Undecided { .. } => Ok(()),
    }
}

/// `true` iff [`check_certificate`] succeeds.
pub fn verify_certificate(cert: &SagbiCertificate) -> bool {
    check_certificate(cert).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(a: &str, ell: usize, r: usize) -> Instance {
        Instance::block_diagonal(&a.parse().unwrap(), ell, r).unwrap()
    }

    #[test]
    fn zero_polynomial_has_empty_trace() {
        let i = inst("2,4", 3, 3);
        let s = subduct(&i, &PPoly::zero()).unwrap();
        assert!(s.trace.steps.is_empty());
        assert!(s.trace.is_zero());
    }

    #[test]
    fn single_minor_subducts_in_one_step() {
        let i = inst("2,2,3,2", 3, 4);
        let h = i.ring().parse("P[1,2,3,4]").unwrap();
        let s = subduct(&i, &h).unwrap();
        assert_eq!(s.trace.steps.len(), 1);
        assert_eq!(s.trace.steps[0].coeff, -1);
        assert_eq!(s.trace.steps[0].multiplier, 1);
        assert!(s.trace.is_zero());
        replay_trace(&i, &s.trace).unwrap();
    }

    #[test]
    fn diagonal_has_no_quadratic_witness() {
        let i = inst("6", 3, 3);
        assert!(witness_search_deg2(&i).unwrap().is_none());
    }

    #[test]
    fn rigorous_check_small() {
        let i = inst("2,4", 3, 3);
        let c = sagbi_check(&i, Mode::Rigorous, &CheckOptions::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Sagbi { rigor: Rigor::Certified });
        check_certificate(&c).unwrap();
    }

    #[test]
    fn incoherent_matrix_is_rejected() {
        let m = WeightMatrix::from_integer_rows(&[vec![0, 0, 0, 0], vec![1, 1, 1, 1]]).unwrap();
        assert!(matches!(Instance::from_matrix(m), Err(Error::NotApplicable(_))));
    }
}
