//! The non-projected supermanifold over `P2` with fermionic sheaf
//! `Pi O(-1) + Pi O(-2)`, its tangent global sections and the
//! connecting map that kills `theta d/dtheta`.
//!
//! Chart `U_i` is `X_i != 0` with even coordinates `X_k/X_i` (`k != i`,
//! ascending) named `z1i, z2i` and odd coordinates `theta1i, theta2i`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::atlas::{
    self, convert_entry, jacobian, omega_is_coboundary, substitute, Atlas, AtlasError, Chart, CochainEntry,
    TransitionMap, VectorCochain, VectorField,
};
use crate::linalg;
use crate::superalgebra::{AlgebraError, Ctx, GeneratorContext, Parity, SuperFrac, SuperMatrix, SuperMonomial, Q};

pub const DEFAULT_DEGREE_BOUND: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum P2Error {
    #[error("structure constraint violated: {0}")]
    ConstraintViolation(String),
    #[error("degree bound {bound} is too small: dimension moved from {low} to {high}")]
    BoundTooSmall { bound: u32, low: String, high: String },
    #[error("field is not global modulo J^2: {0}")]
    NotGlobalModJ2(String),
    #[error("lambda must be specialised for {0}")]
    NeedsLambda(&'static str),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Atlas(#[from] AtlasError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

pub type Result<T> = std::result::Result<T, P2Error>;

/// Fermionic degrees are fixed at `(-1, -2)`; `lambda = None` keeps it formal.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FamilyParams {
    pub lambda: Option<Q>,
}

impl FamilyParams {
    pub fn formal() -> Self {
        FamilyParams { lambda: None }
    }

    pub fn at(lambda: Q) -> Self {
        FamilyParams { lambda: Some(lambda) }
    }

    pub fn at_int(lambda: i64) -> Self {
        FamilyParams::at(Q::from_integer(lambda.into()))
    }

    pub const FERMIONIC_DEGREES: (i64, i64) = (-1, -2);
}

pub fn charts() -> (Ctx, Vec<Chart>) {
    let mut even = Vec::new();
    let mut odd = Vec::new();
    let mut charts = Vec::new();
    for i in 0..3 {
        let e = [format!("z1{i}"), format!("z2{i}")];
        let o = [format!("theta1{i}"), format!("theta2{i}")];
        charts.push(Chart::new(&format!("U{i}"), &e, &o));
        even.extend(e);
        odd.extend(o);
    }
    let ctx = GeneratorContext::new(&even, &odd, &[] as &[String]).expect("fixed names are valid");
    (ctx, charts)
}

/// `X_k / X_j` written on chart `j`.
fn ratio_on(ctx: &Ctx, k: usize, j: usize) -> Result<SuperFrac> {
    if k == j {
        return Ok(SuperFrac::one(ctx));
    }
    let pos = (0..3).filter(|&x| x != j).position(|x| x == k).unwrap();
    Ok(SuperFrac::var(ctx, &format!("z{}{j}", pos + 1))?)
}

pub fn build_family_atlas(p: &FamilyParams) -> Result<Atlas> {
    let (ctx, charts) = charts();
    // U1 -> U0, U2 -> U1, U0 -> U2; the reverse directions are inverted
    let authored = [
        (
            1,
            0,
            [
                ("z10", "1/z11"),
                ("z20", "z21/z11 + lambda*theta11*theta21/z11^2"),
                ("theta10", "theta11/z11"),
                ("theta20", "theta21/z11^2"),
            ],
        ),
        (
            2,
            1,
            [
                ("z11", "z12/z22 + lambda*theta12*theta22/z22^2"),
                ("z21", "1/z22"),
                ("theta11", "theta12/z22"),
                ("theta21", "theta22/z22^2"),
            ],
        ),
        (
            0,
            2,
            [
                ("z12", "1/z20"),
                ("z22", "z10/z20 + lambda*theta10*theta20/z20^2"),
                ("theta12", "theta10/z20"),
                ("theta22", "theta20/z20^2"),
            ],
        ),
    ];
    let given = authored
        .iter()
        .map(|(s, t, pairs)| TransitionMap::parse(&ctx, &charts[*s], &charts[*t], pairs))
        .collect::<atlas::Result<Vec<_>>>()?;
    let mut a = Atlas::new("P2_omega", &ctx, charts, given)?;
    if let Some(l) = &p.lambda {
        a = a.specialize_lambda(l)?;
    }
    check_fermionic_determinant(&a)?;
    Ok(a)
}

/// `theta1i theta2i = (X_j/X_i)^3 theta1j theta2j` on every ordered overlap.
pub fn check_fermionic_determinant(a: &Atlas) -> Result<()> {
    let ctx = a.ctx();
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            let t = a.transition(j, i);
            let (ci, cj) = (&a.charts()[i], &a.charts()[j]);
            let prod = t.get(&ci.odd[0]).unwrap() * t.get(&ci.odd[1]).unwrap();
            let g = prod.partial(&cj.odd[0])?.partial(&cj.odd[1])?;
            let want = ratio_on(ctx, i, j)?.invert_even()?.pow(3);
            let rest = &prod - &(&(&g * &SuperFrac::var(ctx, &cj.odd[0])?) * &SuperFrac::var(ctx, &cj.odd[1])?);
            if g != want || !rest.is_zero() {
                return Err(P2Error::ConstraintViolation(format!(
                    "{}{} on {}: got {g}, expected {want}",
                    ci.odd[0], ci.odd[1], cj.name
                )));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Canonical,
    Solved,
}

#[derive(Clone, Debug)]
pub struct GlobalSectionBasis {
    pub even: Vec<VectorField>,
    pub odd: Vec<VectorField>,
    pub provenance: Provenance,
}

impl GlobalSectionBasis {
    pub fn dims(&self) -> (usize, usize) {
        (self.even.len(), self.odd.len())
    }

    pub fn all(&self) -> impl Iterator<Item = &VectorField> {
        self.even.iter().chain(&self.odd)
    }

    pub fn to_json(&self) -> Value {
        let show = |v: &[VectorField]| v.iter().map(|f| Value::String(f.to_string())).collect::<Vec<_>>();
        json!({
            "dimension": format!("{}|{}", self.even.len(), self.odd.len()),
            "provenance": match self.provenance { Provenance::Canonical => "canonical", Provenance::Solved => "solved" },
            "even": show(&self.even),
            "odd": show(&self.odd),
        })
    }
}

/// Component lists on `U0` (coordinates `z1, z2 | theta1, theta2`).
pub const EVEN_SECTIONS: [[&str; 4]; 12] = [
    ["1", "0", "0", "0"],
    ["0", "1", "0", "0"],
    ["z20", "0", "0", "0"],
    ["0", "z10", "0", "0"],
    ["z10", "-z20", "0", "0"],
    ["0", "0", "0", "theta10"],
    ["0", "0", "0", "z10*theta10"],
    ["0", "0", "0", "z20*theta10"],
    ["0", "z20", "theta10", "0"],
    ["0", "z20", "0", "theta20"],
    ["z10^2", "z10*z20 + lambda*theta10*theta20", "z10*theta10", "2*z10*theta20"],
    ["z10*z20 - lambda*theta10*theta20", "z20^2", "z20*theta10", "2*z20*theta20"],
];

pub const ODD_SECTIONS: [[&str; 4]; 12] = [
    ["0", "0", "1", "0"],
    ["0", "0", "0", "1"],
    ["theta10", "0", "0", "0"],
    ["0", "theta10", "0", "0"],
    ["0", "0", "0", "z10"],
    ["0", "0", "0", "z20"],
    ["0", "-lambda*z10*theta10", "0", "z10^2"],
    ["lambda*z20*theta10", "0", "0", "z20^2"],
    ["0", "lambda*theta20", "z10", "0"],
    ["lambda*theta20", "0", "-z20", "0"],
    ["z10*theta10", "z20*theta10", "0", "2*theta10*theta20"],
    ["0", "-lambda*z20*theta10", "0", "z10*z20 - lambda*theta10*theta20"],
];

fn field_on_u0(a: &Atlas, comps: &[&str; 4], lambda: &Option<Q>) -> Result<VectorField> {
    let chart = &a.charts()[0];
    let pairs: Vec<(&str, &str)> = chart.coords().map(String::as_str).zip(comps.iter().copied()).collect();
    let v = VectorField::parse(a.ctx(), chart, &pairs)?;
    Ok(match lambda {
        Some(l) => v.try_map(|c| c.specialize_lambda(l))?,
        None => v,
    })
}

/// The listed generators, in the atlas context of `a` (which fixes how
/// `lambda` is read: pass the same params used to build `a`).
pub fn canonical_sections_in(a: &Atlas, p: &FamilyParams) -> Result<GlobalSectionBasis> {
    let even = EVEN_SECTIONS.iter().map(|c| field_on_u0(a, c, &p.lambda)).collect::<Result<_>>()?;
    let odd = ODD_SECTIONS.iter().map(|c| field_on_u0(a, c, &p.lambda)).collect::<Result<_>>()?;
    Ok(GlobalSectionBasis { even, odd, provenance: Provenance::Canonical })
}

pub fn canonical_sections(p: &FamilyParams) -> Result<GlobalSectionBasis> {
    canonical_sections_in(&build_family_atlas(p)?, p)
}

/// Regular on its own chart and on every other chart after transport.
pub fn is_global(a: &Atlas, v: &VectorField) -> Result<bool> {
    if !v.is_regular() {
        return Ok(false);
    }
    let home = a.chart_index(&v.chart.name)?;
    for j in 0..a.charts().len() {
        if j != home && !a.transport_to(v, j)?.is_regular() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Transport with a precomputed Jacobian (the solver moves hundreds of
/// fields through the same two maps).
struct Mover {
    t: TransitionMap,
    jac: SuperMatrix,
}

impl Mover {
    fn new(t: &TransitionMap) -> Result<Self> {
        Ok(Mover { t: t.clone(), jac: jacobian(t)? })
    }

    fn moved(&self, v: &VectorField) -> Result<Vec<SuperFrac>> {
        let ctx = self.t.ctx();
        let mut out = vec![SuperFrac::zero(ctx); self.t.source.dim()];
        for (r, c) in v.components.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c = substitute(c, &self.t)?;
            for (k, slot) in out.iter_mut().enumerate() {
                let j = self.jac.get(r, k);
                if !j.is_zero() {
                    *slot = slot.checked_add(&c.checked_mul(j)?)?;
                }
            }
        }
        Ok(out)
    }
}

/// Homogeneous ansatz on `U0`: each unknown is one monomial in one
/// component.
fn ansatz(a: &Atlas, parity: Parity, bound: u32) -> Result<Vec<VectorField>> {
    let ctx = a.ctx();
    let chart = &a.charts()[0];
    let z: Vec<SuperFrac> = chart.even.iter().map(|c| SuperFrac::var(ctx, c)).collect::<std::result::Result<_, _>>()?;
    let th: Vec<SuperFrac> = chart.odd.iter().map(|c| SuperFrac::var(ctx, c)).collect::<std::result::Result<_, _>>()?;
    let one = SuperFrac::one(ctx);
    let pair = &th[0] * &th[1];
    let even_odd_parts = [one.clone(), pair.clone()];
    let odd_odd_parts = [th[0].clone(), th[1].clone()];
    let mut out = Vec::new();
    for (comp, cp) in chart.parities().into_iter().enumerate() {
        // the coefficient must have parity `parity + cp`
        let parts = if (parity + cp).is_odd() { &odd_odd_parts } else { &even_odd_parts };
        for exps in atlas::monomial_exponents(2, bound) {
            let body = &z[0].pow(exps[0]) * &z[1].pow(exps[1]);
            for part in parts {
                let mut v = VectorField::zero(ctx, chart);
                v.components[comp] = &body * part;
                out.push(v);
            }
        }
    }
    Ok(out)
}

fn solve_parity(a: &Atlas, movers: &[Mover], parity: Parity, bound: u32) -> Result<Vec<VectorField>> {
    let unknowns = ansatz(a, parity, bound)?;
    let mut keys: BTreeMap<(usize, usize, SuperMonomial), usize> = BTreeMap::new();
    let mut cols: Vec<BTreeMap<usize, Q>> = Vec::with_capacity(unknowns.len());
    for u in &unknowns {
        let mut col = BTreeMap::new();
        for (m, mover) in movers.iter().enumerate() {
            for (comp, f) in mover.moved(u)?.iter().enumerate() {
                let p = f.as_laurent().ok_or_else(|| AtlasError::NotLaurent(f.to_string()))?;
                if p.has_params() {
                    return Err(P2Error::NeedsLambda("solve_global_sections"));
                }
                for (mono, c) in p.terms() {
                    if mono.has_negative_exponent() {
                        let n = keys.len();
                        let row = *keys.entry((m, comp, mono.clone())).or_insert(n);
                        *col.entry(row).or_insert_with(Q::zero) += c;
                    }
                }
            }
        }
        cols.push(col);
    }
    let mut rows = vec![vec![Q::zero(); unknowns.len()]; keys.len()];
    for (j, col) in cols.iter().enumerate() {
        for (&r, c) in col {
            rows[r][j] = c.clone();
        }
    }
    let ctx = a.ctx();
    linalg::nullspace(&rows, unknowns.len())
        .into_iter()
        .map(|vec| {
            let mut acc = VectorField::zero(ctx, &a.charts()[0]);
            for (c, u) in vec.iter().zip(&unknowns) {
                if !c.is_zero() {
                    acc = acc.checked_add(&u.scale(c))?;
                }
            }
            Ok(acc)
        })
        .collect()
}

fn solve_at(a: &Atlas, bound: u32) -> Result<GlobalSectionBasis> {
    let movers = [Mover::new(a.transition(1, 0))?, Mover::new(a.transition(2, 0))?];
    Ok(GlobalSectionBasis {
        even: solve_parity(a, &movers, Parity::Even, bound)?,
        odd: solve_parity(a, &movers, Parity::Odd, bound)?,
        provenance: Provenance::Solved,
    })
}

/// Global sections by linear algebra over a polynomial ansatz on `U0`,
/// re-run at `bound + 1` to make sure nothing was cut off.
pub fn solve_global_sections(p: &FamilyParams, degree_bound: u32) -> Result<GlobalSectionBasis> {
    if p.lambda.is_none() {
        return Err(P2Error::NeedsLambda("solve_global_sections"));
    }
    if degree_bound < 3 {
        return Err(P2Error::Invalid(format!("degree bound {degree_bound} is below 3")));
    }
    let a = build_family_atlas(p)?;
    let low = solve_at(&a, degree_bound)?;
    let high = solve_at(&a, degree_bound + 1)?;
    if low.dims() != high.dims() {
        let show = |d: (usize, usize)| format!("{}|{}", d.0, d.1);
        return Err(P2Error::BoundTooSmall { bound: degree_bound, low: show(low.dims()), high: show(high.dims()) });
    }
    Ok(low)
}

/// Coefficient vectors of fields on a common chart, over a shared monomial
/// index.
fn coefficient_rows(fields: &[&VectorField]) -> Result<Vec<Vec<Q>>> {
    let mut keys: BTreeMap<(usize, SuperMonomial), usize> = BTreeMap::new();
    let mut sparse = Vec::new();
    for v in fields {
        let mut row = BTreeMap::new();
        for (comp, f) in v.components.iter().enumerate() {
            let p = f.as_laurent().ok_or_else(|| AtlasError::NotLaurent(f.to_string()))?;
            for (m, c) in p.terms() {
                let n = keys.len();
                row.insert(*keys.entry((comp, m.clone())).or_insert(n), c.clone());
            }
        }
        sparse.push(row);
    }
    Ok(sparse
        .into_iter()
        .map(|row| {
            let mut dense = vec![Q::zero(); keys.len()];
            for (k, c) in row {
                dense[k] = c;
            }
            dense
        })
        .collect())
}

/// Rank over `Q` of a family of fields (lambda must be specialised).
pub fn span_rank(fields: &[&VectorField]) -> Result<usize> {
    Ok(linalg::rank(&coefficient_rows(fields)?))
}

/// Both bases span the same `Q`-space.
pub fn same_span(a: &GlobalSectionBasis, b: &GlobalSectionBasis) -> Result<bool> {
    let check = |x: &[VectorField], y: &[VectorField]| -> Result<bool> {
        let xs: Vec<&VectorField> = x.iter().collect();
        let ys: Vec<&VectorField> = y.iter().collect();
        let both: Vec<&VectorField> = x.iter().chain(y).collect();
        let r = span_rank(&both)?;
        Ok(r == span_rank(&xs)? && r == span_rank(&ys)?)
    };
    Ok(check(&a.even, &b.even)? && check(&a.odd, &b.odd)?)
}

/// Drop every term of odd degree >= 2 (the class of `v` in `T / J^2 T`).
pub fn reduce_mod_j2(v: &VectorField) -> Result<VectorField> {
    Ok(v.try_map(|c| Ok(c.map_num(|p| p.filter(|m| m.odd_degree() < 2))))?)
}

#[derive(Clone, Debug)]
pub struct DeltaReport {
    /// Residues `lift_j - lift_i`, entry `(i, j)` in basis `i`, coefficients on `j`.
    pub cochain: VectorCochain,
    pub degree_bound: u32,
    pub is_coboundary: bool,
}

impl DeltaReport {
    pub fn nonzero_class(&self) -> bool {
        !self.is_coboundary
    }

    pub fn to_json(&self, a: &Atlas) -> Value {
        json!({
            "residues": self.cochain.to_json(a),
            "degree_bound": self.degree_bound,
            "coboundary": self.is_coboundary,
            "nonzero_class": self.nonzero_class(),
        })
    }
}

/// Connecting map `H0(T/J^2 T) -> H1(J^2 T)` on an even field: lift the
/// reduced field to every chart, take differences on overlaps and ask
/// whether they are a coboundary of `theta theta * poly * d/dz` terms.
pub fn delta_class(a: &Atlas, v: &VectorField, degree_bound: u32) -> Result<DeltaReport> {
    if v.parity() != Some(Parity::Even) {
        return Err(P2Error::Invalid("connecting map is implemented for even fields".into()));
    }
    let n = a.charts().len();
    // lift on U_j: the transported field minus its polar J^2 terms, so an
    // honest global section has zero residues
    let mut lifts = Vec::with_capacity(n);
    for j in 0..n {
        let moved = a.transport_to(v, j)?;
        if !reduce_mod_j2(&moved)?.is_regular() {
            return Err(P2Error::NotGlobalModJ2(format!("{} on {}", moved, a.charts()[j].name)));
        }
        let l = moved.try_map(|c| {
            let p = c.as_laurent().ok_or_else(|| AlgebraError::Parse(format!("not Laurent: {c}")))?;
            Ok(SuperFrac::from_poly(p.filter(|m| m.odd_degree() < 2 || !m.has_negative_exponent())))
        })?;
        lifts.push(l);
    }
    let mut cochain = VectorCochain::default();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let diff = lifts[j].checked_add(&a.transport_to(&lifts[i], j)?.scale(&-Q::one()))?;
            if !reduce_mod_j2(&diff)?.is_zero() {
                return Err(P2Error::NotGlobalModJ2(format!("lifts disagree modulo J^2 on {}", a.charts()[j].name)));
            }
            let k = a.charts()[j].even.len();
            let e = CochainEntry { basis: j, coeff: j, components: diff.components[..k].to_vec() };
            cochain.entries.insert((i, j), convert_entry(a, &e, i, j)?);
        }
    }
    let is_coboundary = omega_is_coboundary(a, &cochain, degree_bound)?;
    Ok(DeltaReport { cochain, degree_bound, is_coboundary })
}

/// `theta_10 d/dtheta_10` on `U0`, the section whose image generates.
pub fn s1(a: &Atlas) -> Result<VectorField> {
    Ok(VectorField::parse(a.ctx(), &a.charts()[0], &[("theta10", "theta10")])?)
}

#[cfg(test)]
mod tests;
