//! Command-line front end. Every subcommand builds a [`Report`]; `main`
//! only prints it and maps the outcome to an exit code.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use serde_json::{json, Value};
use thiserror::Error;

use crate::atlas::{extract_omega, verify_cocycle};
use crate::cohomology::{self, CohomError, SheafExpr};
use crate::embedding;
use crate::grassmannian::{self, BigCellIndex, GrassDescriptor, GrassError, Grassmannian};
use crate::p2family::{self, FamilyParams};
use crate::selftest::{self, Fixtures};
use crate::superalgebra::Q;

pub const SCHEMA: &str = "superp2.report/1";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Cap(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Cap(_) => 3,
        }
    }
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

impl From<GrassError> for CliError {
    fn from(e: GrassError) -> Self {
        match e {
            GrassError::CapExceeded { .. } => CliError::Cap(e.to_string()),
            GrassError::Invalid(_) => CliError::Usage(e.to_string()),
            e => failed(e),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "superp2",
    version,
    about = "Exact checks for the non-projected P2 supermanifold and super Grassmannians"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Exact rational such as `1`, `-3/2`.
    #[arg(long, global = true, default_value = "1", allow_hyphen_values = true)]
    pub lambda: String,
    #[arg(long, global = true, default_value_t = p2family::DEFAULT_DEGREE_BOUND)]
    pub degree_bound: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Shorthand for `--format json`.
    #[arg(long, global = true)]
    pub json: bool,
    /// Largest number of big cells a Grassmannian command may build.
    #[arg(long, global = true, default_value_t = grassmannian::DEFAULT_CAP)]
    pub cap: usize,
    /// Also write the report here.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl GlobalOpts {
    pub fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else {
            self.format
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cohomology table of a sheaf expression, e.g. "T(-3) on P2".
    Cohom {
        expr: String,
        #[arg(long)]
        q: Option<usize>,
    },
    /// Super Grassmannian charts.
    Grass {
        #[command(subcommand)]
        action: GrassAction,
    },
    /// The non-projected P2 family.
    P2 {
        #[command(subcommand)]
        action: P2Action,
    },
    /// Evaluation map into G(2|2; C^12|12).
    Embed {
        #[arg(long)]
        check_rank: bool,
    },
    /// Replay every reference check.
    Selftest {
        /// Directory whose fixture files replace the built-in ones.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct GrassArgs {
    pub d0: usize,
    pub d1: usize,
    pub n: usize,
    pub m: usize,
}

impl GrassArgs {
    fn desc(&self) -> Result<GrassDescriptor, CliError> {
        Ok(GrassDescriptor::new(self.d0, self.d1, self.n, self.m)?)
    }
}

#[derive(Debug, Subcommand)]
pub enum GrassAction {
    Cells(GrassArgs),
    /// Coordinates of cell `--to` written in cell `--from`; cells are
    /// `EVEN:ODD` 1-based column lists such as `1,2:1`.
    Transitions {
        #[command(flatten)]
        g: GrassArgs,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    AtlasCheck(GrassArgs),
    /// Obstruction class of O(a, b) on G(1|1; C^2|2).
    Picard {
        #[arg(allow_negative_numbers = true)]
        a: i64,
        #[arg(allow_negative_numbers = true)]
        b: i64,
    },
}

#[derive(Debug, Subcommand)]
pub enum P2Action {
    Build,
    Sections {
        #[arg(long, conflicts_with = "solve")]
        verify: bool,
        #[arg(long)]
        solve: bool,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub subcommand: String,
    pub inputs: Value,
    pub results: Value,
    /// `(name, passed, counts against the exit code)`.
    pub checks: Vec<(String, bool, bool)>,
    pub text: Vec<String>,
    /// The text lines already state every check.
    pub text_has_checks: bool,
}

impl Report {
    fn new(subcommand: &str, inputs: Value) -> Self {
        Report {
            subcommand: subcommand.into(),
            inputs,
            results: json!({}),
            checks: Vec::new(),
            text: Vec::new(),
            text_has_checks: false,
        }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool) {
        self.checks.push((name.into(), passed, true));
    }

    pub fn failed(&self) -> bool {
        self.checks.iter().any(|(_, p, counts)| !p && *counts)
    }

    pub fn to_json(&self) -> Value {
        let checks: Vec<Value> = self.checks.iter().map(|(n, p, _)| json!({"name": n, "passed": p})).collect();
        json!({
            "schema": SCHEMA,
            "subcommand": self.subcommand,
            "inputs": self.inputs,
            "results": self.results,
            "checks": checks,
            "ok": !self.failed(),
        })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(&self.to_json()).expect("report serializes") + "\n",
            Format::Text => {
                let mut s = String::new();
                for l in &self.text {
                    s.push_str(l);
                    s.push('\n');
                }
                for (n, p, _) in self.checks.iter().filter(|_| !self.text_has_checks) {
                    s.push_str(&format!("{} {n}\n", if *p { "PASS" } else { "FAIL" }));
                }
                s
            }
        }
    }
}

pub fn parse_lambda(s: &str) -> Result<Q, CliError> {
    s.trim().parse::<Q>().map_err(|_| CliError::Usage(format!("lambda must be an exact rational like 3/2, got {s:?}")))
}

fn parse_cell(g: &GrassDescriptor, s: &str) -> Result<BigCellIndex, CliError> {
    let (e, o) = s.split_once(':').unwrap_or((s, ""));
    let list = |t: &str| -> Result<Vec<usize>, CliError> {
        t.split(',')
            .filter(|x| !x.trim().is_empty())
            .map(|x| x.trim().parse().map_err(|_| CliError::Usage(format!("bad cell {s:?}"))))
            .collect()
    };
    Ok(BigCellIndex::new(g, list(e)?, list(o)?)?)
}

/// Parse `args` (without the program name) and execute.
pub fn run_args<I, S>(args: I) -> Result<(Report, Format), CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("superp2")).chain(args.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok((execute(&cli)?, cli.global.format()))
}

pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Cohom { expr, q } => cmd_cohom(expr, *q),
        Command::Grass { action } => cmd_grass(action, g.cap),
        Command::P2 { action } => cmd_p2(action, g),
        Command::Embed { check_rank } => cmd_embed(g, *check_rank),
        Command::Selftest { fixtures } => cmd_selftest(fixtures.as_deref()),
    }
}

pub fn cmd_cohom(expr: &str, q: Option<usize>) -> Result<Report, CliError> {
    let e = SheafExpr::parse(expr).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut r = Report::new("cohom", json!({"expr": expr, "q": q}));
    let map = |e: CohomError| match e {
        CohomError::Parse(_) | CohomError::QOutOfRange { .. } => CliError::Usage(e.to_string()),
        CohomError::SizeCap => CliError::Cap(e.to_string()),
        e => failed(e),
    };
    match q {
        Some(q) => {
            let d = cohomology::eval_sheaf(&e, q).map_err(map)?;
            r.text.push(format!("h^{q} = {d}"));
            r.results = json!({"q": q, "dimension": d.to_string()});
        }
        None => {
            let t = cohomology::cohomology_table(&e).map_err(map)?;
            for (q, d) in t.iter().enumerate() {
                r.text.push(format!("h^{q} = {d}"));
            }
            r.results = json!({"table": t.iter().map(|d| d.to_string()).collect::<Vec<_>>()});
        }
    }
    Ok(r)
}

pub fn cmd_grass(action: &GrassAction, cap: usize) -> Result<Report, CliError> {
    match action {
        GrassAction::Cells(a) => {
            let gr = Grassmannian::new(a.desc()?, cap)?;
            let mut r = Report::new("grass cells", json!({"grassmannian": gr.desc.to_string(), "cap": cap}));
            r.results = gr.cells_json();
            let (e, o) = gr.desc.dimension();
            r.text.push(format!("{}: dimension {e}|{o}, {} cells", gr.desc, gr.cells.len()));
            for c in &gr.cells {
                r.text.push(format!("{} {}  even {:?}  odd {:?}", c.chart.name, c.index, c.chart.even, c.chart.odd));
            }
            Ok(r)
        }
        GrassAction::Transitions { g, from, to } => {
            let gr = Grassmannian::new(g.desc()?, cap)?;
            let (fi, ti) = (parse_cell(&gr.desc, from)?, parse_cell(&gr.desc, to)?);
            let pos =
                |idx: &BigCellIndex| gr.cells.iter().position(|c| &c.index == idx).expect("every index is a cell");
            let t = gr.transition(pos(&fi), pos(&ti))?;
            let mut r = Report::new(
                "grass transitions",
                json!({"grassmannian": gr.desc.to_string(), "from": fi.to_string(), "to": ti.to_string()}),
            );
            let mut map = serde_json::Map::new();
            for (c, f) in t.target.coords().zip(&t.assignment) {
                r.text.push(format!("{c} = {f}"));
                map.insert(c.clone(), Value::String(f.to_string()));
            }
            r.results = json!({"identity": t.is_identity(), "assignments": map});
            Ok(r)
        }
        GrassAction::AtlasCheck(a) => {
            let atlas = grassmannian::build_atlas(a.desc()?, cap)?;
            let rep = verify_cocycle(&atlas);
            let mut r = Report::new("grass atlas-check", json!({"grassmannian": atlas.name, "cap": cap}));
            r.text.push(format!(
                "{}: {} charts, {} triple checks, {} failures",
                atlas.name,
                atlas.charts().len(),
                rep.checked,
                rep.failures.len()
            ));
            r.results = rep.to_json();
            r.check("cocycle", rep.passed());
            Ok(r)
        }
        GrassAction::Picard { a, b } => {
            let p = grassmannian::picard_boundary(*a, *b)?;
            let mut r = Report::new("grass picard", json!({"bidegree": [a, b]}));
            r.text.push(format!("delta({a},{b}) = {}", p.coefficient));
            r.text.push(format!("h12 h23 / h13 on U2 = {}", p.triple_product));
            r.results = p.to_json();
            Ok(r)
        }
    }
}

pub fn cmd_p2(action: &P2Action, g: &GlobalOpts) -> Result<Report, CliError> {
    let lambda = parse_lambda(&g.lambda)?;
    let p = FamilyParams::at(lambda.clone());
    let a = p2family::build_family_atlas(&p).map_err(failed)?;
    let inputs = json!({"lambda": lambda.to_string(), "degree_bound": g.degree_bound});
    match action {
        P2Action::Build => {
            let mut r = Report::new("p2 build", inputs);
            let rep = verify_cocycle(&a);
            let omega = extract_omega(&a).map_err(failed)?;
            r.text.push(format!("3 charts, {} cocycle checks, {} failures", rep.checked, rep.failures.len()));
            for ((i, j), e) in &omega.entries {
                if i < j {
                    r.text.push(format!("omega U{i},U{j}: {}", e.display(&a)));
                }
            }
            r.results = json!({"atlas": a.to_json(), "cocycle": rep.to_json(), "omega": omega.to_json(&a), "omega_zero": omega.is_zero()});
            r.check("cocycle", rep.passed());
            r.check("odd determinant is the cube cocycle", p2family::check_fermionic_determinant(&a).is_ok());
            Ok(r)
        }
        P2Action::Sections { verify, solve } => {
            let canon = p2family::canonical_sections_in(&a, &p).map_err(failed)?;
            if *solve {
                let s = p2family::solve_global_sections(&p, g.degree_bound).map_err(|e| match e {
                    p2family::P2Error::Invalid(_) => CliError::Usage(e.to_string()),
                    e => failed(e),
                })?;
                let same = p2family::same_span(&s, &canon).map_err(failed)?;
                let mut r = Report::new("p2 sections --solve", inputs);
                let (e, o) = s.dims();
                r.text.push(format!("dimension {e}|{o} at degree bound {}", g.degree_bound));
                r.text.push(format!("span equals the listed generators: {same}"));
                r.results = json!({"basis": s.to_json(), "same_span_as_canonical": same});
                if !lambda.is_zero() {
                    r.check("12|12", s.dims() == (12, 12));
                    r.check("span equals listed generators", same);
                }
                return Ok(r);
            }
            let _ = verify;
            let mut r = Report::new("p2 sections --verify", inputs);
            let mut flags = Vec::new();
            for (k, v) in canon.all().enumerate() {
                let ok = p2family::is_global(&a, v).map_err(failed)?;
                let name = if k < 12 { format!("V{}", k + 1) } else { format!("Xi{}", k - 11) };
                r.text.push(format!("{} {name}: {v}", if ok { "global" } else { "NOT global" }));
                flags.push(json!({"section": name, "global": ok}));
                r.check(format!("{name} is global"), ok);
            }
            let d = p2family::delta_class(&a, &p2family::s1(&a).map_err(failed)?, g.degree_bound).map_err(failed)?;
            r.text.push(format!("delta(theta10 d/dtheta10): nonzero class = {}", d.nonzero_class()));
            r.results = json!({"basis": canon.to_json(), "global": flags, "delta_s1": d.to_json(&a)});
            Ok(r)
        }
    }
}

pub fn cmd_embed(g: &GlobalOpts, check_rank: bool) -> Result<Report, CliError> {
    let lambda = parse_lambda(&g.lambda)?;
    let p = FamilyParams::at(lambda.clone());
    let a = p2family::build_family_atlas(&p).map_err(failed)?;
    let basis = p2family::canonical_sections_in(&a, &p).map_err(failed)?;
    let m = embedding::evaluation_matrix(&a, &basis, 0).map_err(failed)?;
    let sub = embedding::sub_selection(&a, &basis).map_err(failed)?;
    let mut r = Report::new("embed", json!({"lambda": lambda.to_string(), "check_rank": check_rank}));
    let show = |b: &crate::superalgebra::SuperMatrix| -> Value {
        Value::Array(
            (0..b.rows())
                .map(|i| Value::Array(b.row(i).iter().map(|f| Value::String(f.to_string())).collect()))
                .collect(),
        )
    };
    let blocks = m.blocks();
    for (name, b) in ["A", "B", "C", "D"].iter().zip(&blocks) {
        for i in 0..b.rows() {
            let row: Vec<String> = b.row(i).iter().map(|f| f.to_string()).collect();
            r.text.push(format!("{name}{}: {}", i + 1, row.join(" | ")));
        }
    }
    let idx = embedding::pivot_index(&sub, &["V1", "V2", "Xi1", "Xi2"]).map_err(failed)?;
    let sf = embedding::standard_form(&sub, &idx).map_err(failed)?;
    r.text.push(format!("i(S) columns {:?}", sub.labels));
    for i in 0..sf.rows() {
        r.text.push(format!("  {}", sf.row(i).iter().map(|f| f.to_string()).collect::<Vec<_>>().join(" | ")));
    }
    let mut results = json!({
        "columns": m.labels,
        "A": show(&blocks[0]), "B": show(&blocks[1]), "C": show(&blocks[2]), "D": show(&blocks[3]),
        "sub_selection": {"columns": sub.labels, "standard_form": show(&sf)},
    });
    if check_rank {
        let samples = embedding::default_samples();
        let mut certs = Vec::new();
        for j in 0..a.charts().len() {
            let mj = embedding::evaluation_matrix(&a, &basis, j).map_err(failed)?;
            let pj = if j == 0 {
                embedding::pivot_index(&mj, &["V1", "V2", "Xi1", "Xi2"]).map_err(failed)?
            } else {
                embedding::choose_pivots(&mj, &samples).map_err(failed)?.ok_or_else(|| failed("no pivot block"))?
            };
            let c = embedding::rank_certificate(&mj, &pj, &samples, (j == 0).then_some(&sub)).map_err(failed)?;
            r.text.push(format!(
                "{}: pivots {} ranks {:?} -> {}",
                c.chart,
                c.pivots,
                c.body_ranks,
                if c.embedding { "embedding" } else { "fails" }
            ));
            r.check(format!("rank 4 on {}", c.chart), c.embedding);
            certs.push(c.to_json());
        }
        let inj = embedding::injectivity_check(&a, &basis, Some(&sub)).map_err(failed)?;
        r.text.push(format!("injective: {}", inj.injective));
        r.check("injective", inj.injective);
        results["certificates"] = Value::Array(certs);
        results["injectivity"] = inj.to_json();
    }
    r.results = results;
    Ok(r)
}

pub fn cmd_selftest(dir: Option<&std::path::Path>) -> Result<Report, CliError> {
    let fx = match dir {
        Some(d) => Fixtures::with_dir(d).map_err(CliError::Usage)?,
        None => Fixtures::embedded(),
    };
    let checks = selftest::run(&fx);
    let mut r = Report::new(
        "selftest",
        json!({"fixtures": dir.map(|d| d.display().to_string()).unwrap_or_else(|| "built-in".into())}),
    );
    r.text_has_checks = true;
    for c in &checks {
        r.text.push(c.line());
        r.checks.push((format!("{} {}", c.id, c.name), c.passed, c.is_regression() || c.passed));
    }
    r.results = Value::Array(checks.iter().map(|c| c.to_json()).collect());
    Ok(r)
}
