//! Replays every golden value and invariant the crate is built around.
//! Each check is numbered; the numbering is shared by the `acceptance`
//! test and the `selftest` subcommand.

use std::path::Path;

use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use crate::atlas::{jacobian, verify_cocycle};
use crate::cohomology::{self, eval_sheaf, h_line, h_line_cech, h_product, h_tangent_twist, SheafExpr, SuperDim};
use crate::embedding::{self, default_samples};
use crate::grassmannian::{self, BigCellIndex, GrassDescriptor, Grassmannian, DEFAULT_CAP};
use crate::p2family::{self, FamilyParams};
use crate::superalgebra::{Ctx, GeneratorContext, Parity, SuperFrac, SuperMatrix, SuperMonomial, SuperPoly, Q};

/// Printed reference data, one JSON document per file.
#[derive(Clone, Debug)]
pub struct Fixtures {
    pub g11_overlaps: Value,
    pub worked_example: Value,
    pub jacobian: Value,
    pub embedding_blocks: Value,
}

const FILES: [&str; 4] = ["g11_overlaps.json", "worked_example.json", "jacobian_u1_u0.json", "embedding_blocks.json"];

impl Fixtures {
    pub fn embedded() -> Self {
        let p = |s: &str| serde_json::from_str(s).expect("embedded fixture parses");
        Fixtures {
            g11_overlaps: p(include_str!("../fixtures/g11_overlaps.json")),
            worked_example: p(include_str!("../fixtures/worked_example.json")),
            jacobian: p(include_str!("../fixtures/jacobian_u1_u0.json")),
            embedding_blocks: p(include_str!("../fixtures/embedding_blocks.json")),
        }
    }

    /// Files present in `dir` replace the embedded ones.
    pub fn with_dir(dir: &Path) -> Result<Self, String> {
        if !dir.is_dir() {
            return Err(format!("{} is not a directory", dir.display()));
        }
        let mut f = Fixtures::embedded();
        for name in FILES {
            let path = dir.join(name);
            if !path.exists() {
                continue;
            }
            let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            let v: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            match name {
                "g11_overlaps.json" => f.g11_overlaps = v,
                "worked_example.json" => f.worked_example = v,
                "jacobian_u1_u0.json" => f.jacobian = v,
                _ => f.embedding_blocks = v,
            }
        }
        Ok(f)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    /// Set when a failure is explained by a defect in the reference data.
    pub known_deviation: Option<&'static str>,
}

impl Check {
    /// Failed and not accounted for by a known deviation.
    pub fn is_regression(&self) -> bool {
        !self.passed && self.known_deviation.is_none()
    }

    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!("{status} {:>2} {}: {}", self.id, self.name, self.detail);
        if let (false, Some(k)) = (self.passed, self.known_deviation) {
            s.push_str(&format!(" [known: {k}]"));
        }
        s
    }

    pub fn to_json(&self) -> Value {
        json!({"id": self.id, "name": self.name, "passed": self.passed, "detail": self.detail, "known_deviation": self.known_deviation})
    }
}

type Outcome = Result<(bool, String), String>;

fn check(id: u32, name: &'static str, f: impl FnOnce() -> Outcome) -> Check {
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Check { id, name, passed, detail, known_deviation: None }
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn rows_of(ctx: &Ctx, v: &Value) -> Result<Vec<Vec<SuperFrac>>, String> {
    v.as_array()
        .ok_or("rows must be an array")?
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| "row must be an array".to_string())?
                .iter()
                .map(|x| SuperFrac::parse(ctx, x.as_str().ok_or("entry must be a string")?).map_err(e))
                .collect()
        })
        .collect()
}

fn compare(got: &SuperMatrix, want: &[Vec<SuperFrac>], label: &str, out: &mut Vec<String>) {
    for (r, row) in want.iter().enumerate() {
        for (c, w) in row.iter().enumerate() {
            if r >= got.rows() || c >= got.cols() {
                out.push(format!("{label}[{},{}] missing", r + 1, c + 1));
            } else if got.get(r, c) != w {
                out.push(format!("{label}[{},{}]: computed {} vs reference {}", r + 1, c + 1, got.get(r, c), w));
            }
        }
    }
}

fn c1(fx: &Fixtures) -> Outcome {
    let gr = Grassmannian::g11().map_err(e)?;
    let mut bad = Vec::new();
    let overlaps = fx.g11_overlaps["overlaps"].as_array().ok_or("overlaps missing")?;
    for o in overlaps {
        let chart = o["chart"].as_str().ok_or("chart")?;
        let ia = gr.cell_index(chart).map_err(e)?;
        let ib = gr.cell_index(o["in"].as_str().ok_or("in")?).map_err(e)?;
        let t = gr.transition(ib, ia).map_err(e)?;
        for (coord, expr) in o["assignments"].as_object().ok_or("assignments")? {
            let want = SuperFrac::parse(gr.ctx(), expr.as_str().ok_or("expr")?).map_err(e)?;
            match t.get(coord) {
                Some(got) if *got == want => {}
                Some(got) => bad.push(format!("{coord} in {}: {got}", o["in"])),
                None => bad.push(format!("{coord} is not a coordinate of {chart}")),
            }
        }
    }
    let rep = verify_cocycle(&gr.build_atlas().map_err(e)?);
    let ok = bad.is_empty() && overlaps.len() == 6 && rep.passed();
    Ok((
        ok,
        format!(
            "{} overlaps, {} mismatches, {} cocycle checks, {} failures{}",
            overlaps.len(),
            bad.len(),
            rep.checked,
            rep.failures.len(),
            first(&bad)
        ),
    ))
}

fn first(v: &[String]) -> String {
    v.first().map(|s| format!(" (first: {s})")).unwrap_or_default()
}

fn index_of(g: &GrassDescriptor, v: &Value) -> Result<BigCellIndex, String> {
    let list = |k: &str| -> Result<Vec<usize>, String> {
        v[k].as_array()
            .ok_or(format!("{k} missing"))?
            .iter()
            .map(|x| x.as_u64().map(|n| n as usize).ok_or(format!("{k} entry")))
            .collect()
    };
    BigCellIndex::new(g, list("i0")?, list("i1")?).map_err(e)
}

fn names_of(v: &Value) -> Result<Vec<String>, String> {
    v["names"]
        .as_array()
        .ok_or("names missing")?
        .iter()
        .map(|x| x.as_str().map(String::from).ok_or("name".into()))
        .collect()
}

fn c2(fx: &Fixtures) -> Outcome {
    let w = &fx.worked_example;
    let g = GrassDescriptor::new(2, 1, 3, 2).map_err(e)?;
    let from = index_of(&g, &w["from"])?;
    let to = index_of(&g, &w["to"])?;
    let (nf, nt) = (names_of(&w["from"])?, names_of(&w["to"])?);
    let gr = Grassmannian::with_names(g, DEFAULT_CAP, &|k, idx| {
        if *idx == from {
            ("I".into(), nf.clone())
        } else if *idx == to {
            ("J".into(), nt.clone())
        } else {
            let label = format!("U{}", k + 1);
            (label.clone(), grassmannian::generic_names(&g, idx, &label))
        }
    })
    .map_err(e)?;
    let i = gr.cell_index("I").map_err(e)?;
    let z_i = &gr.cells[i].matrix;
    let glue = grassmannian::gluing(&g, z_i, &to).map_err(e)?;
    let mut bad = Vec::new();
    compare(z_i, &rows_of(gr.ctx(), &w["z_i"])?, "Z_I", &mut bad);
    compare(&glue.b, &rows_of(gr.ctx(), &w["b"])?, "B", &mut bad);
    compare(&glue.z_j, &rows_of(gr.ctx(), &w["z_j"])?, "Z_J", &mut bad);
    let ident = glue.b.checked_mul(&glue.b_inv).map_err(e)?.is_identity()
        && glue.b_inv.checked_mul(&glue.b).map_err(e)?.is_identity();
    Ok((bad.is_empty() && ident, format!("{} mismatches, B*B^-1 identity: {ident}{}", bad.len(), first(&bad))))
}

fn c3() -> Outcome {
    let dim =
        |s: &str, q: usize| -> Result<SuperDim, String> { eval_sheaf(&SheafExpr::parse(s).map_err(e)?, q).map_err(e) };
    let a = dim("O(0,-2) + O(-2,0) on P1xP1", 1)?;
    let b = h_product(-2, -2, 2).map_err(e)?;
    let c = h_tangent_twist(2, -3, 1).map_err(e)?;
    let mut sweep = 0;
    let mut bad = Vec::new();
    for n in 1..=2usize {
        for d in -6..=6 {
            for q in 0..=n {
                sweep += 1;
                if h_line(n, d, q).map_err(e)? != h_line_cech(n, d, q).map_err(e)? {
                    bad.push(format!("n={n} d={d} q={q}"));
                }
            }
        }
    }
    let deco = dim(cohomology::QUOTIENT_DECOMPOSITION, 0)?;
    let ok = a == SuperDim::new(2, 0) && b == 1 && c == 1 && bad.is_empty();
    Ok((ok, format!("h1(O(0,-2)+O(-2,0)) = {a}, h2(O(-2,-2)) = {b}, h1(T(-3)) = {c}, {sweep} oracle cases, {} mismatches; quotient h0 = {deco}", bad.len())))
}

fn c4() -> Outcome {
    let a = p2family::build_family_atlas(&FamilyParams::formal()).map_err(e)?;
    let rep = verify_cocycle(&a);
    let det = p2family::check_fermionic_determinant(&a);
    Ok((
        rep.passed() && det.is_ok(),
        format!(
            "{} cocycle checks, {} failures, odd determinant {}",
            rep.checked,
            rep.failures.len(),
            match &det {
                Ok(()) => "z^-3 on all 6 overlaps".into(),
                Err(e) => e.to_string(),
            }
        ),
    ))
}

fn c5(fx: &Fixtures) -> Outcome {
    let j = &fx.jacobian;
    let lambda: Q = j["lambda"].as_str().ok_or("lambda")?.parse().map_err(e)?;
    let a = p2family::build_family_atlas(&FamilyParams::at(lambda)).map_err(e)?;
    let s = a.chart_index(j["source"].as_str().ok_or("source")?).map_err(e)?;
    let t = a.chart_index(j["target"].as_str().ok_or("target")?).map_err(e)?;
    let jac = jacobian(a.transition(s, t)).map_err(e)?;
    let mut bad = Vec::new();
    compare(&jac, &rows_of(a.ctx(), &j["rows"])?, "Jac", &mut bad);
    Ok((
        bad.is_empty(),
        format!("4x4 at lambda = {}, {} mismatches{}", j["lambda"].as_str().unwrap_or("?"), bad.len(), first(&bad)),
    ))
}

fn c6() -> Outcome {
    let p = FamilyParams::formal();
    let a = p2family::build_family_atlas(&p).map_err(e)?;
    let canon = p2family::canonical_sections_in(&a, &p).map_err(e)?;
    let mut global = 0;
    for v in canon.all() {
        if p2family::is_global(&a, v).map_err(e)? {
            global += 1;
        }
    }
    let p1 = FamilyParams::at_int(1);
    let s1 = p2family::solve_global_sections(&p1, p2family::DEFAULT_DEGREE_BOUND).map_err(e)?;
    let span = p2family::same_span(&s1, &p2family::canonical_sections(&p1).map_err(e)?).map_err(e)?;
    let s0 = p2family::solve_global_sections(&FamilyParams::at_int(0), p2family::DEFAULT_DEGREE_BOUND).map_err(e)?;
    let ok = global == 24 && s1.dims() == (12, 12) && span && s0.dims() == (13, 12);
    Ok((
        ok,
        format!(
            "{global}/24 global (formal lambda); lambda=1: {}|{}, same span: {span}; lambda=0: {}|{}",
            s1.dims().0,
            s1.dims().1,
            s0.dims().0,
            s0.dims().1
        ),
    ))
}

fn c7() -> Outcome {
    let a = p2family::build_family_atlas(&FamilyParams::at_int(1)).map_err(e)?;
    let r = p2family::delta_class(&a, &p2family::s1(&a).map_err(e)?, p2family::DEFAULT_DEGREE_BOUND).map_err(e)?;
    let entry = r.cochain.get(0, 1).map(|x| x.display(&a)).unwrap_or_default();
    Ok((
        r.nonzero_class(),
        format!("residue on U0,U1: {entry}; coboundary at bound {}: {}", r.degree_bound, r.is_coboundary),
    ))
}

fn c8(fx: &Fixtures) -> Outcome {
    let p = FamilyParams::formal();
    let a = p2family::build_family_atlas(&p).map_err(e)?;
    let basis = p2family::canonical_sections_in(&a, &p).map_err(e)?;
    let m = embedding::evaluation_matrix(&a, &basis, 0).map_err(e)?;
    let mut bad = Vec::new();
    for (name, block) in ["A", "B", "C", "D"].iter().zip(m.blocks()) {
        compare(&block, &rows_of(a.ctx(), &fx.embedding_blocks[name])?, name, &mut bad);
    }
    let sub = embedding::sub_selection(&a, &basis).map_err(e)?;
    let idx = embedding::pivot_index(&sub, &["V1", "V2", "Xi1", "Xi2"]).map_err(e)?;
    let sf = embedding::standard_form(&sub, &idx).map_err(e)?;
    let mut bad_s = Vec::new();
    compare(&sf, &rows_of(a.ctx(), &fx.embedding_blocks["sub_selection"]["rows"])?, "i(S)", &mut bad_s);
    let n = bad.len() + bad_s.len();
    bad.extend(bad_s);
    Ok((
        n == 0,
        format!(
            "{n} mismatches over 80 block entries and 24 i(S) entries{}",
            if bad.is_empty() { String::new() } else { format!(" ({})", bad.join("; ")) }
        ),
    ))
}

fn c9() -> Outcome {
    let p = FamilyParams::at_int(1);
    let a = p2family::build_family_atlas(&p).map_err(e)?;
    let basis = p2family::canonical_sections_in(&a, &p).map_err(e)?;
    let sub = embedding::sub_selection(&a, &basis).map_err(e)?;
    let samples = default_samples();
    let mut ok = true;
    let mut parts = Vec::new();
    for j in 0..a.charts().len() {
        let m = embedding::evaluation_matrix(&a, &basis, j).map_err(e)?;
        let idx = if j == 0 {
            embedding::pivot_index(&m, &["V1", "V2", "Xi1", "Xi2"]).map_err(e)?
        } else {
            embedding::choose_pivots(&m, &samples).map_err(e)?.ok_or("no pivot block")?
        };
        let cert = embedding::rank_certificate(&m, &idx, &samples, (j == 0).then_some(&sub)).map_err(e)?;
        ok &= cert.embedding && cert.body_ranks.iter().all(|&r| r == 4);
        parts.push(format!("{} ranks {:?}", cert.chart, cert.body_ranks));
        if let Some(minor) = &cert.identity_minor {
            parts.push(format!("i(S) minor identity: {}", minor.is_identity()));
        }
    }
    Ok((ok, parts.join(", ")))
}

fn c10() -> Outcome {
    let gr = Grassmannian::g11().map_err(e)?;
    let f = |a: i64, b: i64| grassmannian::picard_boundary_on(&gr, a, b).map_err(e);
    let one = Q::one();
    let r10 = f(1, 0)?;
    let want = SuperFrac::parse(gr.ctx(), "1 + xi2*eta2/(x2*y2)").map_err(e)?;
    let mut ok = r10.coefficient == one && r10.triple_product == want && f(0, 1)?.coefficient == one;
    for k in 1..=3 {
        ok &= f(k, -k)?.coefficient.is_zero();
    }
    let mut grid = std::collections::BTreeMap::new();
    for a in -2..=2i64 {
        for b in -2..=2i64 {
            grid.insert((a, b), f(a, b)?.coefficient);
        }
    }
    let mut additive = true;
    for (&(a, b), v) in &grid {
        for (&(c, d), w) in &grid {
            if let Some(s) = grid.get(&(a + c, b + d)) {
                additive &= *s == v + w;
            }
        }
    }
    ok &= additive;
    Ok((
        ok,
        format!(
            "delta(1,0) = {} via {}, delta(0,1) = {}, additive on 5x5: {additive}",
            r10.coefficient,
            r10.triple_product,
            f(0, 1)?.coefficient
        ),
    ))
}

// ---- randomized algebra properties ----

struct Gen {
    ctx: Ctx,
    rng: StdRng,
}

impl Gen {
    fn poly(&mut self, parity: Parity, terms: usize) -> SuperFrac {
        let mut p = SuperPoly::zero(&self.ctx);
        let nodd = self.ctx.odd_names().len();
        for _ in 0..terms {
            let mut m = SuperMonomial::one(&self.ctx);
            loop {
                m.odd = self.rng.gen_range(0..1u64 << nodd);
                if Parity::from_count(m.odd.count_ones()) == parity {
                    break;
                }
            }
            for x in m.even.iter_mut() {
                *x = self.rng.gen_range(0..3);
            }
            let c: i64 = self.rng.gen_range(-3..=3);
            if c != 0 {
                p.add_term(m, Q::from_integer(c.into()));
            }
        }
        SuperFrac::from_poly(p)
    }

    fn parity(&mut self) -> Parity {
        if self.rng.gen_bool(0.5) {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

/// Number of randomized cases in the property replay.
pub const PROPERTY_CASES: usize = 10_000;

pub fn algebra_properties(cases: usize, seed: u64) -> Result<(usize, Vec<String>), String> {
    let ctx = GeneratorContext::new(&["z", "w"], &["t1", "t2", "t3", "t4"], &[] as &[&str]).map_err(e)?;
    let mut g = Gen { ctx: ctx.clone(), rng: StdRng::seed_from_u64(seed) };
    let mut failures = Vec::new();
    let mut checks = 0;
    for case in 0..cases {
        let (pa, pb, pc) = (g.parity(), g.parity(), g.parity());
        let (a, b, c) = (g.poly(pa, 3), g.poly(pb, 3), g.poly(pc, 2));
        let ab = &a * &b;
        let ba = &b * &a;
        let sign = if pa.is_odd() && pb.is_odd() { -Q::one() } else { Q::one() };
        checks += 1;
        if ab != ba.scale(&sign) {
            failures.push(format!("case {case}: graded commutativity for {a} and {b}"));
        }
        checks += 1;
        if &ab * &c != &a * &(&b * &c) {
            failures.push(format!("case {case}: associativity"));
        }
        for v in ["t1", "t3", "z"] {
            checks += 1;
            let odd_var = v.starts_with('t');
            let lhs = ab.partial(v).map_err(e)?;
            let s = if odd_var && pa.is_odd() { -Q::one() } else { Q::one() };
            let rhs = &(&a.partial(v).map_err(e)? * &b) + &(&a * &b.partial(v).map_err(e)?).scale(&s);
            if lhs != rhs {
                failures.push(format!("case {case}: Leibniz in {v} for {a} and {b}"));
            }
        }
        // units: nonzero constant body plus a random nilpotent even part
        let body = Q::from_integer(g.rng.gen_range(1..=5i64).into());
        let u = &SuperFrac::constant(&ctx, body) + &g.poly(Parity::Even, 2).map_num(|p| p.soul());
        checks += 1;
        match u.invert_even() {
            Ok(inv) if (&u * &inv).is_one() => {}
            _ => failures.push(format!("case {case}: invert_even of {u}")),
        }
        if failures.len() > 20 {
            break;
        }
    }
    Ok((checks, failures))
}

/// Matrices and even elements from the reference computations whose
/// inverses must multiply back to the identity.
pub fn inversion_fixtures(fx: &Fixtures) -> Result<(usize, Vec<String>), String> {
    let mut bad = Vec::new();
    let mut count = 0;
    let mut mat = |m: &SuperMatrix, label: String| -> Result<(), String> {
        count += 1;
        let inv = m.invert().map_err(e)?;
        if !(m.checked_mul(&inv).map_err(e)?.is_identity() && inv.checked_mul(m).map_err(e)?.is_identity()) {
            bad.push(label);
        }
        Ok(())
    };
    let a = p2family::build_family_atlas(&FamilyParams::formal()).map_err(e)?;
    for ((i, j), t) in a.transitions() {
        if i != j {
            mat(&jacobian(t).map_err(e)?, format!("Jacobian U{i} U{j}"))?;
        }
    }
    let gr = Grassmannian::g11().map_err(e)?;
    for i in 0..gr.cells.len() {
        for j in 0..gr.cells.len() {
            if i != j {
                let glue = grassmannian::gluing(&gr.desc, &gr.cells[i].matrix, &gr.cells[j].index).map_err(e)?;
                mat(&glue.b, format!("G(1|1) block {i} {j}"))?;
            }
        }
    }
    let g = GrassDescriptor::new(2, 1, 3, 2).map_err(e)?;
    let w = &fx.worked_example;
    let names = |v: &Value| names_of(v);
    let (nf, nt) = (names(&w["from"])?, names(&w["to"])?);
    let from = index_of(&g, &w["from"])?;
    let to = index_of(&g, &w["to"])?;
    let gw = Grassmannian::with_names(g, DEFAULT_CAP, &|k, idx| {
        if *idx == from {
            ("I".into(), nf.clone())
        } else if *idx == to {
            ("J".into(), nt.clone())
        } else {
            let label = format!("U{}", k + 1);
            (label.clone(), grassmannian::generic_names(&g, idx, &label))
        }
    })
    .map_err(e)?;
    let i = gw.cell_index("I").map_err(e)?;
    mat(&grassmannian::gluing(&g, &gw.cells[i].matrix, &to).map_err(e)?.b, "worked example B".into())?;
    for (ctx, s) in
        [(a.ctx(), "z11 + lambda*theta11*theta21"), (a.ctx(), "1 + theta10*theta20"), (gr.ctx(), "x2 + xi2*eta2")]
    {
        count += 1;
        let u = SuperFrac::parse(ctx, s).map_err(e)?;
        if !(&u * &u.invert_even().map_err(e)?).is_one() {
            bad.push(s.to_string());
        }
    }
    Ok((count, bad))
}

fn c11(fx: &Fixtures) -> Outcome {
    let (checks, failures) = algebra_properties(PROPERTY_CASES, 0x5eed)?;
    let (inv, bad) = inversion_fixtures(fx)?;
    let ok = failures.is_empty() && bad.is_empty();
    Ok((
        ok,
        format!(
            "{PROPERTY_CASES} random cases ({checks} identities), {} failures; {inv} inversion fixtures, {} failures{}",
            failures.len(),
            bad.len(),
            first(&failures)
        ),
    ))
}

/// Entries of the printed reference data that no consistent computation
/// can reproduce.
pub const KNOWN_DEVIATIONS: [(u32, &str); 1] = [(
    8,
    "B[2,10] is printed as -lambda*z2, an even expression in an odd slot; the computed entry is -lambda*z2*theta1",
)];

pub fn run(fx: &Fixtures) -> Vec<Check> {
    let mut out = vec![
        check(1, "G(1|1) overlap table and cocycle", || c1(fx)),
        check(2, "worked 1|1-in-3|2 gluing", || c2(fx)),
        check(3, "line bundle and tangent cohomology", c3),
        check(4, "P2 family atlas and odd determinant", c4),
        check(5, "Jacobian of U1 -> U0", || c5(fx)),
        check(6, "tangent global sections", c6),
        check(7, "connecting map on theta d/dtheta", c7),
        check(8, "evaluation blocks and i(S)", || c8(fx)),
        check(9, "rank certificate on three charts", c9),
        check(10, "Picard boundary", c10),
        check(11, "algebra property suites", || c11(fx)),
    ];
    for c in out.iter_mut() {
        if c.passed {
            continue;
        }
        if let Some((_, why)) = KNOWN_DEVIATIONS.iter().find(|(id, _)| *id == c.id) {
            // only the documented entry may differ
            if c.id == 8 && c.detail.starts_with("1 mismatches") && c.detail.contains("B[2,10]") {
                c.known_deviation = Some(why);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests;
