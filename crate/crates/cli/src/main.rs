mod render;
mod repro;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bdmf::sagbi::{
    all_deg2_witnesses, check_certificate, check_witness, sagbi_check, witness_of, witness_search_deg2, CheckOptions,
    Instance, Mode, SagbiCertificate, Verdict,
};
use bdmf::toric::{ToricCache, ToricCaps};
use bdmf::verify::{sweep, SweepGrid, SweepOptions};
use bdmf::{Composition, Error, MatchingField, Result, WeightMatrix};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "bdmf", version, about = "Block diagonal matching fields on Grassmannians")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Do not read or write the toric basis cache.
    #[arg(long, global = true)]
    no_cache: bool,

    /// Cache directory (default: $BDMF_CACHE_DIR, then ~/.cache/bdmf).
    #[arg(long, global = true, value_name = "DIR")]
    cache_dir: Option<PathBuf>,

    /// Record wall times in certificates and reports.
    #[arg(long, global = true)]
    timing: bool,

    /// Cap on S-pairs processed while computing a toric basis.
    #[arg(long, global = true, default_value_t = ToricCaps::default().max_pairs)]
    max_pairs: u64,

    /// Cap on binomial degree while computing a toric basis.
    #[arg(long, global = true, default_value_t = ToricCaps::default().max_degree)]
    max_degree: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Print the weight matrix M_{a,ell}.
    Matrix {
        #[command(flatten)]
        inst: BlockArgs,
        /// Evaluate at this value of β instead of printing polynomials in β.
        #[arg(long)]
        beta: Option<i128>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print the matching field: permutation, type and block of every index.
    Mf {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Initial term of ψ(h) for a polynomial h in Plücker variables.
    Initial {
        #[command(flatten)]
        inst: InstanceArgs,
        /// For example "P[1,2,4,6]*P[2,3,5,8] - P[1,2,5,6]*P[2,3,4,8]".
        expr: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Find a degree-2 obstruction to the SAGBI property, or check a given relation.
    Witness {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Use this relation instead of searching.
        #[arg(long)]
        h: Option<String>,
        /// List every degree-2 obstruction.
        #[arg(long)]
        all: bool,
        /// Also print tableaux as LaTeX.
        #[arg(long)]
        latex: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Decide whether the Plücker coordinates form a SAGBI basis.
    SagbiCheck {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Rigorous)]
        mode: ModeArg,
        /// Degree bound in fast mode.
        #[arg(long, default_value_t = 3)]
        degree: usize,
        /// Write the certificate as JSON to this file.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long)]
        latex: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compare predicted and computed verdicts over a grid of instances.
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Values of ell (default 3..=r).
        #[arg(long, value_delimiter = ',')]
        ell: Option<Vec<usize>>,
        /// Include compositions with last part 1.
        #[arg(long)]
        include_last_one: bool,
        #[arg(long, value_enum, default_value_t = ModeArg::Fast)]
        mode: ModeArg,
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long)]
        jobs: Option<usize>,
        /// Reuse the verdict of (1, a_1 - 1, ...) when 2 <= a_1 <= ell.
        #[arg(long)]
        dedup: bool,
        /// Write the report; `.csv` gives CSV, anything else JSON.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Re-check a certificate written by `sagbi-check --out`.
    VerifyCert { file: PathBuf },
    /// Reproduce a worked example.
    Repro {
        /// One of ex3.5, ex3.6, sec3.3, ex4.2, ex4.3, ex5.2, ex5.3, ex5.4.
        target: String,
    },
}

#[derive(Args)]
struct BlockArgs {
    #[arg(long)]
    r: usize,
    /// Optional; must equal the sum of the parts of a.
    #[arg(long)]
    n: Option<usize>,
    /// Composition of n, e.g. 2,2,3,2.
    #[arg(long)]
    a: Composition,
    #[arg(long)]
    ell: usize,
}

impl BlockArgs {
    fn check_n(&self) -> Result<()> {
        match self.n {
            Some(n) if n != self.a.n() => {
                Err(Error::InvalidParameters(format!("--n {n} disagrees with |a| = {}", self.a.n())))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    a: Option<Composition>,
    #[arg(long)]
    ell: Option<usize>,
    /// JSON weight tensor (as written by `matrix --format json`) instead of a and ell.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["a", "ell"])]
    matrix: Option<PathBuf>,
}

impl InstanceArgs {
    fn build(&self) -> Result<Instance> {
        let inst = match (&self.a, self.ell, &self.matrix) {
            (Some(a), Some(ell), None) => {
                let r = self.r.ok_or_else(|| Error::InvalidParameters("--r is required".into()))?;
                Instance::block_diagonal(a, ell, r)?
            }
            (None, None, Some(path)) => Instance::from_matrix(read_matrix(path)?)?,
            _ => return Err(Error::InvalidParameters("give --a and --ell, or --matrix".into())),
        };
        let p = inst.params();
        if self.r.is_some_and(|r| r != p.r) || self.n.is_some_and(|n| n != p.n) {
            return Err(Error::InvalidParameters(format!("--r/--n disagree with Gr({},{})", p.r, p.n)));
        }
        Ok(inst)
    }
}

fn read_matrix(path: &Path) -> Result<WeightMatrix> {
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let tensor = v.get("tensor").unwrap_or(&v);
    let tensor: Vec<Vec<Vec<i64>>> = serde_json::from_value(tensor.clone())?;
    WeightMatrix::from_tensor(&tensor)
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
    Latex,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Rigorous,
    Fast,
}

impl ModeArg {
    fn mode(self, degree: usize) -> Mode {
        match self {
            ModeArg::Rigorous => Mode::Rigorous,
            ModeArg::Fast => Mode::Fast { degree },
        }
    }
}

/// Outcome of a subcommand that ran to completion.
enum Status {
    Ok,
    Failed,
    ResourceLimit,
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn unsupported(format: Format) -> Error {
    Error::InvalidParameters(format!("format {:?} is not available here", format_name(format)))
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Text => "text",
        Format::Json => "json",
        Format::Csv => "csv",
        Format::Latex => "latex",
    }
}

fn check_options(cli: &Cli) -> CheckOptions {
    let cache = if cli.no_cache {
        None
    } else {
        cli.cache_dir.clone().map(ToricCache::new).or_else(ToricCache::from_env)
    };
    CheckOptions { caps: ToricCaps { max_pairs: cli.max_pairs, max_degree: cli.max_degree }, cache, timing: cli.timing }
}

fn verdict_status(v: &Verdict) -> Status {
    match v {
        Verdict::Undecided { reason } if reason.starts_with("resource limit") => Status::ResourceLimit,
        Verdict::Undecided { .. } => Status::Failed,
        _ => Status::Ok,
    }
}

fn run(cli: &Cli, out: &mut String) -> Result<Status> {
    match &cli.command {
        Command::Matrix { inst, beta, format } => {
            inst.check_n()?;
            let m = WeightMatrix::block_diagonal(&inst.a, inst.ell, inst.r)?;
            match format {
                Format::Text => out.push_str(&render::matrix_text(&m, *beta)),
                Format::Json => out.push_str(&json(&render::MatrixJson {
                    r: m.r(),
                    n: m.n(),
                    a: Some(inst.a.clone()),
                    ell: Some(inst.ell),
                    tensor: m.to_tensor(),
                    beta: *beta,
                    evaluated: beta.map(|b| m.evaluate(b)),
                })?),
                f => return Err(unsupported(*f)),
            }
        }
        Command::Mf { inst, format } => {
            let i = inst.build()?;
            let field: &MatchingField = i.field();
            let rows = render::mf_rows(field, i.params().a.as_ref())?;
            match format {
                Format::Text => out.push_str(&render::mf_text(&rows)),
                Format::Csv => out.push_str(&render::mf_csv(&rows)?),
                Format::Json => out.push_str(&json(&rows)?),
                f => return Err(unsupported(*f)),
            }
        }
        Command::Initial { inst, expr, format } => {
            let i = inst.build()?;
            let h = i.ring().parse(expr)?;
            let rep = render::initial_report(&i, &h)?;
            match format {
                Format::Text => out.push_str(&render::initial_text(&rep)),
                Format::Json => out.push_str(&json(&rep)?),
                Format::Latex => {
                    let t = rep.tableau.as_ref().ok_or_else(|| {
                        Error::NotApplicable("the initial monomial is not realized by a term of h".into())
                    })?;
                    out.push_str(&t.to_latex());
                    out.push('\n');
                }
                f => return Err(unsupported(*f)),
            }
        }
        Command::Witness { inst, h, all, latex, format } => {
            let i = inst.build()?;
            let found = match (h, all) {
                (Some(h), _) => witness_of(&i, &i.ring().parse(h)?)?.into_iter().collect(),
                (None, true) => all_deg2_witnesses(&i)?,
                (None, false) => witness_search_deg2(&i)?.into_iter().collect::<Vec<_>>(),
            };
            for w in &found {
                check_witness(&i, w)?;
            }
            match format {
                Format::Text => {
                    if found.is_empty() {
                        out.push_str("no obstruction found\n");
                    }
                    for (k, w) in found.iter().enumerate() {
                        if k > 0 {
                            out.push('\n');
                        }
                        out.push_str(&render::witness_text(w, *latex));
                    }
                }
                Format::Json => out.push_str(&json(&found)?),
                f => return Err(unsupported(*f)),
            }
        }
        Command::SagbiCheck { inst, mode, degree, out: file, latex, format } => {
            let i = inst.build()?;
            let cert = sagbi_check(&i, mode.mode(*degree), &check_options(cli))?;
            if let Some(path) = file {
                fs::write(path, json(&cert)?)?;
            }
            match format {
                Format::Text => out.push_str(&render::certificate_text(&cert, *latex)),
                Format::Json => out.push_str(&json(&cert)?),
                f => return Err(unsupported(*f)),
            }
            return Ok(verdict_status(&cert.verdict));
        }
        Command::Sweep { r, n, ell, include_last_one, mode, degree, jobs, dedup, out: file } => {
            let shapes = if r.len() == 1 && n.len() == 1 {
                vec![(r[0], n[0])]
            } else {
                let mut v = Vec::new();
                for &n in n {
                    for &r in r {
                        if r == 2 || (r >= 3 && r + 3 <= n) {
                            v.push((r, n));
                        }
                    }
                }
                v
            };
            let grid = SweepGrid { shapes, ells: ell.clone(), last_part_at_least_two: !include_last_one };
            let opts = SweepOptions { mode: mode.mode(*degree), check: check_options(cli), jobs: *jobs, dedup: *dedup };
            let rep = sweep(&grid, &opts)?;
            if let Some(path) = file {
                let body = if path.extension().is_some_and(|e| e == "csv") {
                    render::sweep_csv(&rep)?
                } else {
                    json(&rep)?
                };
                fs::write(path, body)?;
            }
            out.push_str(&render::sweep_text(&rep));
            for row in rep.disagreements() {
                out.push_str(&format!(
                    "DISAGREEMENT: Gr({},{}) a={} ell={} predicted {} but computed {}\n",
                    row.r, row.n, row.a, row.ell, row.prediction.outcome, row.verdict
                ));
            }
            if rep.summary.disagreements > 0 {
                return Ok(Status::Failed);
            }
        }
        Command::VerifyCert { file } => {
            let cert: SagbiCertificate = serde_json::from_str(&fs::read_to_string(file)?)?;
            match check_certificate(&cert) {
                Ok(()) => out.push_str(&format!("valid: {} {}\n", cert.parameters, cert.verdict)),
                Err(e) => {
                    out.push_str(&format!("invalid: {e}\n"));
                    return Ok(Status::Failed);
                }
            }
        }
        Command::Repro { target } => out.push_str(&repro::run(target)?),
    }
    Ok(Status::Ok)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ValidationFailure(_) => 1,
        Error::ResourceLimit(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let result = run(&cli, &mut out);
    print!("{out}");
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(1),
        Ok(Status::ResourceLimit) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
