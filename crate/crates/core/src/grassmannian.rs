//! Super Grassmannians `G(d0|d1; C^{n|m})` through their big cells.
//!
//! A cell is labelled by `I = (I0, I1)`, a `d0`-subset of the even columns and
//! a `d1`-subset of the odd columns (1-based). Its matrix `Z_I` has `d0` even
//! rows followed by `d1` odd rows, `n` even columns followed by `m` odd ones,
//! and the identity in the columns of `I`. Coordinates are the remaining
//! entries, named row-major. Passing from `I` to `J` is `Z_J = B^-1 Z_I` with
//! `B` the columns of `Z_I` selected by `J`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::atlas::{self, Atlas, AtlasError, Chart, TransitionMap};
use crate::superalgebra::{AlgebraError, Ctx, GeneratorContext, Parity, SuperFrac, SuperMatrix, Var, Q};

pub const DEFAULT_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrassError {
    #[error("invalid descriptor: {0}")]
    Invalid(String),
    #[error("{cells} cells exceed the cap of {cap}")]
    CapExceeded { cells: u128, cap: usize },
    #[error("cells {0} and {1} do not meet")]
    Disjoint(String, String),
    #[error("malformed cochain: {0}")]
    MalformedCochain(String),
    #[error(transparent)]
    Atlas(#[from] AtlasError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

pub type Result<T> = std::result::Result<T, GrassError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GrassDescriptor {
    pub d0: usize,
    pub d1: usize,
    pub n: usize,
    pub m: usize,
}

impl GrassDescriptor {
    pub fn new(d0: usize, d1: usize, n: usize, m: usize) -> Result<Self> {
        if d0 > n || d1 > m {
            return Err(GrassError::Invalid(format!("G({d0}|{d1}; C^{n}|{m})")));
        }
        if d0 + d1 == 0 {
            return Err(GrassError::Invalid("rank 0|0".into()));
        }
        Ok(GrassDescriptor { d0, d1, n, m })
    }

    /// `even | odd` dimension.
    pub fn dimension(&self) -> (usize, usize) {
        let (d0, d1, n, m) = (self.d0, self.d1, self.n, self.m);
        (d0 * (n - d0) + d1 * (m - d1), d0 * (m - d1) + d1 * (n - d0))
    }

    pub fn cell_count(&self) -> u128 {
        binomial(self.n, self.d0) * binomial(self.m, self.d1)
    }

    pub fn row_parities(&self) -> Vec<Parity> {
        let mut p = vec![Parity::Even; self.d0];
        p.extend(vec![Parity::Odd; self.d1]);
        p
    }

    pub fn col_parities(&self) -> Vec<Parity> {
        let mut p = vec![Parity::Even; self.n];
        p.extend(vec![Parity::Odd; self.m]);
        p
    }
}

impl fmt::Display for GrassDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G({}|{}; C^{}|{})", self.d0, self.d1, self.n, self.m)
    }
}

pub fn dimension(g: &GrassDescriptor) -> (usize, usize) {
    g.dimension()
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Increasing `k`-subsets of `1..=n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i + 1) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BigCellIndex {
    pub i0: Vec<usize>,
    pub i1: Vec<usize>,
}

impl BigCellIndex {
    pub fn new(g: &GrassDescriptor, i0: Vec<usize>, i1: Vec<usize>) -> Result<Self> {
        let ok = |s: &[usize], d: usize, top: usize| {
            s.len() == d && s.windows(2).all(|w| w[0] < w[1]) && s.iter().all(|&x| (1..=top).contains(&x))
        };
        if !ok(&i0, g.d0, g.n) || !ok(&i1, g.d1, g.m) {
            return Err(GrassError::Invalid(format!("cell index {i0:?} {i1:?} for {g}")));
        }
        Ok(BigCellIndex { i0, i1 })
    }

    /// 0-based matrix columns, even part first.
    pub fn columns(&self, g: &GrassDescriptor) -> Vec<usize> {
        self.i0.iter().map(|c| c - 1).chain(self.i1.iter().map(|c| g.n + c - 1)).collect()
    }
}

impl fmt::Display for BigCellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set = |s: &[usize]| s.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        write!(f, "({{{}}},{{{}}})", set(&self.i0), set(&self.i1))
    }
}

pub fn enumerate_cells(g: &GrassDescriptor) -> Vec<BigCellIndex> {
    let evens = subsets(g.n, g.d0);
    let odds = subsets(g.m, g.d1);
    let mut out = Vec::with_capacity(evens.len() * odds.len());
    for a in &evens {
        for b in &odds {
            out.push(BigCellIndex { i0: a.clone(), i1: b.clone() });
        }
    }
    out
}

/// Coordinate slots `(row, col, parity)` of a cell, row-major over the
/// columns outside `I`.
pub fn coordinate_slots(g: &GrassDescriptor, idx: &BigCellIndex) -> Vec<(usize, usize, Parity)> {
    let ident = idx.columns(g);
    let rp = g.row_parities();
    let cp = g.col_parities();
    let mut out = Vec::new();
    for (r, &pr) in rp.iter().enumerate() {
        for (c, &pc) in cp.iter().enumerate() {
            if !ident.contains(&c) {
                out.push((r, c, pr + pc));
            }
        }
    }
    out
}

/// Default names `x[r,c]@label` / `xi[r,c]@label`, 1-based.
pub fn generic_names(g: &GrassDescriptor, idx: &BigCellIndex, label: &str) -> Vec<String> {
    coordinate_slots(g, idx)
        .into_iter()
        .map(|(r, c, p)| {
            let stem = if p.is_odd() { "xi" } else { "x" };
            format!("{stem}[{},{}]@{label}", r + 1, c + 1)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct BigCell {
    pub index: BigCellIndex,
    pub chart: Chart,
    pub matrix: SuperMatrix,
    /// Matrix position of each chart coordinate, aligned with `chart.coords()`.
    positions: Vec<(usize, usize)>,
}

impl BigCell {
    /// `names` follows `coordinate_slots` order.
    pub fn new(
        ctx: &Ctx,
        g: &GrassDescriptor,
        index: BigCellIndex,
        chart_name: &str,
        names: &[String],
    ) -> Result<Self> {
        let slots = coordinate_slots(g, &index);
        if names.len() != slots.len() {
            return Err(GrassError::Invalid(format!("{} names for {} slots", names.len(), slots.len())));
        }
        let mut m = SuperMatrix::zeros(ctx, g.row_parities(), g.col_parities());
        for (r, &c) in index.columns(g).iter().enumerate() {
            m.set(r, c, SuperFrac::one(ctx));
        }
        let (mut even, mut odd, mut pe, mut po) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (&(r, c, p), name) in slots.iter().zip(names) {
            m.set(r, c, SuperFrac::var(ctx, name)?);
            if p.is_odd() {
                odd.push(name.clone());
                po.push((r, c));
            } else {
                even.push(name.clone());
                pe.push((r, c));
            }
        }
        pe.extend(po);
        Ok(BigCell { index, chart: Chart::new(chart_name, &even, &odd), matrix: m, positions: pe })
    }

    pub fn positions(&self) -> &[(usize, usize)] {
        &self.positions
    }
}

/// `B_IJ`, its inverse and `Z_J = B^-1 Z_I`.
#[derive(Clone, Debug)]
pub struct Gluing {
    pub b: SuperMatrix,
    pub b_inv: SuperMatrix,
    pub z_j: SuperMatrix,
}

pub fn gluing(g: &GrassDescriptor, z_i: &SuperMatrix, j: &BigCellIndex) -> Result<Gluing> {
    let rows: Vec<usize> = (0..g.d0 + g.d1).collect();
    let b = z_i.submatrix(&rows, &j.columns(g));
    let b_inv = b.invert()?;
    let z_j = b_inv.checked_mul(z_i)?;
    Ok(Gluing { b, b_inv, z_j })
}

/// Coordinates of `to` written in those of `from`.
pub fn transition(g: &GrassDescriptor, from: &BigCell, to: &BigCell) -> Result<TransitionMap> {
    let ctx = from.matrix.ctx();
    if from.index == to.index {
        return Ok(TransitionMap::identity(ctx, &from.chart)?);
    }
    let glue = gluing(g, &from.matrix, &to.index).map_err(|e| match e {
        GrassError::Algebra(AlgebraError::SingularBody) => {
            GrassError::Disjoint(from.index.to_string(), to.index.to_string())
        }
        e => e,
    })?;
    for (r, &c) in to.index.columns(g).iter().enumerate() {
        for rr in 0..g.d0 + g.d1 {
            let want = if rr == r { SuperFrac::one(ctx) } else { SuperFrac::zero(ctx) };
            if *glue.z_j.get(rr, c) != want {
                return Err(AlgebraError::InverseCheck.into());
            }
        }
    }
    let assignment = to.positions.iter().map(|&(r, c)| glue.z_j.get(r, c).clone()).collect();
    Ok(TransitionMap::new(ctx, &from.chart, &to.chart, assignment)?)
}

/// Picks coordinate names for a cell: `(position in lex order, index)` to
/// a chart name and the slot names.
pub type Namer<'a> = dyn Fn(usize, &BigCellIndex) -> (String, Vec<String>) + 'a;

#[derive(Clone, Debug)]
pub struct Grassmannian {
    pub desc: GrassDescriptor,
    pub cells: Vec<BigCell>,
    ctx: Ctx,
}

impl Grassmannian {
    /// All cells with generic names; charts are `U1, U2, ...` in lex order.
    pub fn new(g: GrassDescriptor, cap: usize) -> Result<Self> {
        Grassmannian::with_names(g, cap, &|k, idx| {
            let label = format!("U{}", k + 1);
            (label.clone(), generic_names(&g, idx, &label))
        })
    }

    pub fn with_names(g: GrassDescriptor, cap: usize, namer: &Namer<'_>) -> Result<Self> {
        let count = g.cell_count();
        if count > cap as u128 {
            return Err(GrassError::CapExceeded { cells: count, cap });
        }
        let idx = enumerate_cells(&g);
        let named: Vec<(String, Vec<String>)> = idx.iter().enumerate().map(|(k, i)| namer(k, i)).collect();
        let mut even = Vec::new();
        let mut odd = Vec::new();
        for (i, (_, names)) in idx.iter().zip(&named) {
            for ((_, _, p), n) in coordinate_slots(&g, i).into_iter().zip(names) {
                if p.is_odd() {
                    odd.push(n.clone());
                } else {
                    even.push(n.clone());
                }
            }
        }
        let ctx = GeneratorContext::new(&even, &odd, &[] as &[String])?;
        let cells = idx
            .into_iter()
            .zip(named)
            .map(|(i, (chart, names))| BigCell::new(&ctx, &g, i, &chart, &names))
            .collect::<Result<Vec<_>>>()?;
        Ok(Grassmannian { desc: g, cells, ctx })
    }

    /// `G(1|1; C^{2|2})` with charts `U1..U4` named `x_k, y_k | xi_k, eta_k`.
    pub fn g11() -> Result<Self> {
        let g = GrassDescriptor::new(1, 1, 2, 2)?;
        // lex order ({1},{1}), ({1},{2}), ({2},{1}), ({2},{2})
        const LABELS: [usize; 4] = [1, 3, 2, 4];
        Grassmannian::with_names(g, DEFAULT_CAP, &|k, _| {
            let u = LABELS[k];
            // slots row-major: row 1 gives x then xi, row 2 gives eta then y
            let names = [format!("x{u}"), format!("xi{u}"), format!("eta{u}"), format!("y{u}")];
            (format!("U{u}"), names.to_vec())
        })
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn cell_index(&self, chart: &str) -> Result<usize> {
        self.cells
            .iter()
            .position(|c| c.chart.name == chart)
            .ok_or_else(|| AtlasError::UnknownChart(chart.into()).into())
    }

    /// Coordinates of cell `j` in cell `i`.
    pub fn transition(&self, i: usize, j: usize) -> Result<TransitionMap> {
        transition(&self.desc, &self.cells[i], &self.cells[j])
    }

    pub fn build_atlas(&self) -> Result<Atlas> {
        let charts: Vec<Chart> = self.cells.iter().map(|c| c.chart.clone()).collect();
        let mut given = Vec::new();
        for i in 0..self.cells.len() {
            for j in 0..self.cells.len() {
                if i != j {
                    given.push(self.transition(i, j)?);
                }
            }
        }
        Ok(Atlas::new(&self.desc.to_string(), &self.ctx, charts, given)?)
    }

    pub fn cells_json(&self) -> Value {
        let cells: Vec<Value> = self
            .cells
            .iter()
            .map(|c| {
                json!({
                    "chart": c.chart.name,
                    "i0": c.index.i0,
                    "i1": c.index.i1,
                    "even": c.chart.even,
                    "odd": c.chart.odd,
                })
            })
            .collect();
        let (e, o) = self.desc.dimension();
        json!({"grassmannian": self.desc.to_string(), "dimension": format!("{e}|{o}"), "count": cells.len(), "cells": cells})
    }
}

pub fn build_atlas(g: GrassDescriptor, cap: usize) -> Result<Atlas> {
    Grassmannian::new(g, cap)?.build_atlas()
}

// ---- the Picard obstruction on G(1|1; C^{2|2}) ----

/// Reduced space of `G(1|1; C^{2|2})` is `P1 x P1` with homogeneous
/// coordinates `[X0:X1]`, `[Y0:Y1]`. Cell `({a+1},{b+1})` is `X_a Y_b != 0`
/// with `x = X_{1-a}/X_a`, `y = Y_{1-b}/Y_b`.
fn affine_patch(cell: &BigCell) -> (usize, usize) {
    (cell.index.i0[0] - 1, cell.index.i1[0] - 1)
}

/// Homogeneous Laurent monomial `X0^p0 X1^p1 Y0^q0 Y1^q1` (degree 0 in each
/// factor) written on a cell.
fn monomial_on(g: &Grassmannian, cell: usize, p: [i64; 2], q: [i64; 2]) -> Result<SuperFrac> {
    if p[0] + p[1] != 0 || q[0] + q[1] != 0 {
        return Err(GrassError::MalformedCochain("ratio is not of degree zero".into()));
    }
    let c = &g.cells[cell];
    let (a, b) = affine_patch(c);
    let ctx = g.ctx();
    let x = SuperFrac::var(ctx, &c.chart.even[0])?;
    let y = SuperFrac::var(ctx, &c.chart.even[1])?;
    Ok(&int_pow(&x, p[1 - a])? * &int_pow(&y, q[1 - b])?)
}

fn int_pow(f: &SuperFrac, e: i64) -> Result<SuperFrac> {
    let k = u32::try_from(e.unsigned_abs()).map_err(|_| GrassError::Invalid("exponent too large".into()))?;
    if e >= 0 {
        Ok(f.pow(k))
    } else {
        Ok(f.invert_even()?.pow(k))
    }
}

/// Coefficient `G` in `f = G * xi * eta` for the odd pair of `cell`.
fn odd_pair_coefficient(g: &Grassmannian, cell: usize, f: &SuperFrac) -> Result<SuperFrac> {
    let c = &g.cells[cell].chart;
    Ok(f.partial(&c.odd[0])?.partial(&c.odd[1])?)
}

/// Signs `eps_k` with `xi_k eta_k <-> eps_k / (X_a^2 Y_b^2)` as a section of
/// `O(-2,-2)`, normalised to `+1` on `U2`.
pub fn odd_pair_signs(g: &Grassmannian) -> Result<Vec<Q>> {
    let r = g.cell_index("U2")?;
    let (ar, br) = affine_patch(&g.cells[r]);
    let mut out = Vec::new();
    for k in 0..g.cells.len() {
        let t = g.transition(r, k)?;
        let ck = &g.cells[k].chart;
        let prod = t.get(&ck.odd[0]).unwrap() * t.get(&ck.odd[1]).unwrap();
        let gk = odd_pair_coefficient(g, r, &prod)?;
        let (a, b) = affine_patch(&g.cells[k]);
        let mut p = [0i64; 2];
        let mut q = [0i64; 2];
        p[a] += 2;
        p[ar] -= 2;
        q[b] += 2;
        q[br] -= 2;
        let eps = (&gk * &monomial_on(g, r, p, q)?).as_constant();
        match eps {
            Some(e) if e == Q::one() || e == -Q::one() => out.push(e),
            _ => {
                return Err(GrassError::MalformedCochain(format!(
                    "odd pair of {} is not a line bundle section",
                    ck.name
                )))
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct PicardReport {
    pub bidegree: (i64, i64),
    /// `h12 h23 h13^-1` on `U2`.
    pub triple_product: SuperFrac,
    /// Coefficient of `xi2 eta2 / (x2 y2)` in `triple_product` (`eps` is 1 on `U2`).
    pub triple_coefficient: Q,
    /// `v_ijk` for each triple of `U1..U4`, keyed like `"123"`.
    pub values: BTreeMap<String, Q>,
    /// Lift-independent class in `H^2(O(-2,-2)) = C`.
    pub coefficient: Q,
}

impl PicardReport {
    pub fn to_json(&self) -> Value {
        let values: serde_json::Map<String, Value> =
            self.values.iter().map(|(k, v)| (k.clone(), Value::String(v.to_string()))).collect();
        json!({
            "bidegree": [self.bidegree.0, self.bidegree.1],
            "triple": "U1,U2,U3",
            "triple_product": self.triple_product.to_string(),
            "triple_coefficient": self.triple_coefficient.to_string(),
            "values": values,
            "coefficient": self.coefficient.to_string(),
        })
    }
}

pub fn picard_boundary(a: i64, b: i64) -> Result<PicardReport> {
    picard_boundary_on(&Grassmannian::g11()?, a, b)
}

/// Lift the transition functions `s_i/s_j` of `O(a,b)` (with
/// `s_i = X_a^a Y_b^b` on `U_i`) to the super cells, take the
/// multiplicative coboundary on every triple and read off the
/// `1/(X0 X1 Y0 Y1)` coefficient. Coboundaries of 1-cochains only reach
/// that monomial on `U1 U4` and `U2 U3`, so `v123 - v234` is the class.
pub fn picard_boundary_on(g: &Grassmannian, a: i64, b: i64) -> Result<PicardReport> {
    if g.desc != GrassDescriptor::new(1, 1, 2, 2)? {
        return Err(GrassError::Invalid(format!("picard boundary needs G(1|1; C^2|2), got {}", g.desc)));
    }
    let u: Vec<usize> = (1..=4).map(|k| g.cell_index(&format!("U{k}"))).collect::<Result<_>>()?;
    let eps = odd_pair_signs(g)?;
    // h_ij on U_j
    let lift = |i: usize, j: usize| -> Result<SuperFrac> {
        let (ai, bi) = affine_patch(&g.cells[i]);
        let (aj, bj) = affine_patch(&g.cells[j]);
        let mut p = [0i64; 2];
        let mut q = [0i64; 2];
        p[ai] += a;
        p[aj] -= a;
        q[bi] += b;
        q[bj] -= b;
        monomial_on(g, j, p, q)
    };
    let on = |k: usize, f: SuperFrac, from: usize| -> Result<SuperFrac> {
        Ok(atlas::substitute(&f, &g.transition(k, from)?)?)
    };
    let mut values = BTreeMap::new();
    let mut triple = None;
    for (x, y, z) in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)] {
        let (i, j, k) = (u[x], u[y], u[z]);
        let hij = on(j, lift(i, j)?, j)?;
        let hjk = on(j, lift(j, k)?, k)?;
        let hik = on(j, lift(i, k)?, k)?;
        let prod = (&hij * &hjk).checked_div(&hik)?;
        let nil = &prod - &SuperFrac::one(g.ctx());
        if !nil.body().is_zero() {
            return Err(GrassError::MalformedCochain(format!("body of the coboundary on {x}{y}{z} is not 1")));
        }
        let coeff = odd_pair_coefficient(g, j, &nil)?;
        let lp = coeff.as_laurent().ok_or_else(|| GrassError::MalformedCochain(coeff.to_string()))?;
        let slot = |name: &str| match g.ctx().var(name) {
            Ok(Var::Even(i)) => Ok(i),
            _ => Err(GrassError::MalformedCochain(name.to_string())),
        };
        let xs = slot(&g.cells[j].chart.even[0])?;
        let ys = slot(&g.cells[j].chart.even[1])?;
        let mut v = Q::zero();
        for (mono, c) in lp.terms() {
            let others_zero = mono.even.iter().enumerate().all(|(s, &e)| s == xs || s == ys || e == 0);
            if others_zero && mono.even[xs] == -1 && mono.even[ys] == -1 {
                v += c * &eps[j];
            }
        }
        let key = format!("{}{}{}", x + 1, y + 1, z + 1);
        if key == "123" {
            triple = Some((prod, v.clone()));
        }
        values.insert(key, v);
    }
    let check = &values["124"] - &values["134"];
    let coefficient = &values["123"] - &values["234"];
    if check != coefficient {
        return Err(GrassError::MalformedCochain("coboundary is not a Cech cocycle".into()));
    }
    let (triple_product, triple_coefficient) = triple.unwrap();
    Ok(PicardReport { bidegree: (a, b), triple_product, triple_coefficient, values, coefficient })
}
