//! Charts glued by coordinate substitutions.
//!
//! `TransitionMap { source: S, target: T }` lists every coordinate of `T` as
//! a function of the coordinates of `S`; pulling a function back along it
//! turns an expression in `T` into one in `S`. `Atlas::transition(i, j)` has
//! source `i` and target `j`, i.e. it writes the coordinates of chart `j` in
//! chart `i`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::linalg;
use crate::superalgebra::json::{context_from_json, context_to_json, frac_from_json, frac_to_json};
use crate::superalgebra::{AlgebraError, Ctx, Parity, Substitution, SuperFrac, SuperMatrix, Var, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AtlasError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("assignment of {0} has the wrong parity")]
    ParityMismatch(String),
    #[error("transition does not match the charts: {0}")]
    ChartMismatch(String),
    #[error("unknown chart {0:?}")]
    UnknownChart(String),
    #[error("no transition between {0} and {1}")]
    MissingTransition(String, String),
    #[error("cannot invert transition {0}: {1}")]
    NotInvertible(String, String),
    #[error("chart {0} has {1} odd coordinates, expected 2")]
    OddCount(String, usize),
    #[error("expression is not a Laurent polynomial: {0}")]
    NotLaurent(String),
    #[error("atlas json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, AtlasError>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    pub name: String,
    pub even: Vec<String>,
    pub odd: Vec<String>,
}

impl Chart {
    pub fn new<S: AsRef<str>>(name: &str, even: &[S], odd: &[S]) -> Chart {
        Chart {
            name: name.to_string(),
            even: even.iter().map(|s| s.as_ref().to_string()).collect(),
            odd: odd.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    /// Even coordinates first, then odd.
    pub fn coords(&self) -> impl Iterator<Item = &String> {
        self.even.iter().chain(&self.odd)
    }

    pub fn dim(&self) -> usize {
        self.even.len() + self.odd.len()
    }

    pub fn parities(&self) -> Vec<Parity> {
        let mut p = vec![Parity::Even; self.even.len()];
        p.extend(vec![Parity::Odd; self.odd.len()]);
        p
    }

    pub fn position(&self, coord: &str) -> Option<usize> {
        self.coords().position(|c| c == coord)
    }

    pub fn vars(&self, ctx: &Ctx) -> Result<Vec<Var>> {
        self.coords().map(|c| Ok(ctx.var(c)?)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct TransitionMap {
    pub source: Chart,
    pub target: Chart,
    /// Aligned with `target.coords()`.
    pub assignment: Vec<SuperFrac>,
    subst: Substitution,
}

impl TransitionMap {
    pub fn new(ctx: &Ctx, source: &Chart, target: &Chart, assignment: Vec<SuperFrac>) -> Result<Self> {
        if assignment.len() != target.dim() {
            return Err(AtlasError::ChartMismatch(format!(
                "{} assignments for chart {}",
                assignment.len(),
                target.name
            )));
        }
        let mut subst = Substitution::new();
        for ((coord, par), a) in target.coords().zip(target.parities()).zip(&assignment) {
            if !a.is_homogeneous(par) {
                return Err(AtlasError::ParityMismatch(coord.clone()));
            }
            subst.insert(ctx.var(coord)?, a.clone());
        }
        Ok(TransitionMap { source: source.clone(), target: target.clone(), assignment, subst })
    }

    /// Parse `coord = expr` style assignments (any order, all required).
    pub fn parse(ctx: &Ctx, source: &Chart, target: &Chart, pairs: &[(&str, &str)]) -> Result<Self> {
        let mut slots: Vec<Option<SuperFrac>> = vec![None; target.dim()];
        for (coord, expr) in pairs {
            let pos = target
                .position(coord)
                .ok_or_else(|| AtlasError::ChartMismatch(format!("{coord} is not a coordinate of {}", target.name)))?;
            slots[pos] = Some(SuperFrac::parse(ctx, expr)?);
        }
        let assignment = slots
            .into_iter()
            .zip(target.coords())
            .map(|(s, c)| s.ok_or_else(|| AtlasError::ChartMismatch(format!("{c} not assigned"))))
            .collect::<Result<Vec<_>>>()?;
        TransitionMap::new(ctx, source, target, assignment)
    }

    pub fn identity(ctx: &Ctx, chart: &Chart) -> Result<Self> {
        let assignment = chart.coords().map(|c| SuperFrac::var(ctx, c)).collect::<std::result::Result<Vec<_>, _>>()?;
        TransitionMap::new(ctx, chart, chart, assignment)
    }

    pub fn ctx(&self) -> &Ctx {
        self.assignment.first().map(SuperFrac::ctx).expect("transition with no coordinates")
    }

    pub fn get(&self, coord: &str) -> Option<&SuperFrac> {
        self.target.position(coord).map(|i| &self.assignment[i])
    }

    pub fn substitution(&self) -> &Substitution {
        &self.subst
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target
            && self
                .target
                .coords()
                .zip(&self.assignment)
                .all(|(c, a)| SuperFrac::var(a.ctx(), c).map(|v| &v == a).unwrap_or(false))
    }

    pub fn map_assignment(
        &self,
        f: impl Fn(&SuperFrac, Parity) -> std::result::Result<SuperFrac, AlgebraError>,
    ) -> Result<Self> {
        let assignment = self
            .assignment
            .iter()
            .zip(self.target.parities())
            .map(|(a, p)| f(a, p))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        TransitionMap::new(self.ctx(), &self.source, &self.target, assignment)
    }

    /// Keep the body of even assignments and the odd-linear part of odd ones.
    pub fn reduced(&self) -> Result<Self> {
        self.map_assignment(|a, p| {
            Ok(match p {
                Parity::Even => a.body(),
                Parity::Odd => a.map_num(|n| n.filter(|m| m.odd_degree() == 1)),
            })
        })
    }

    pub fn specialize_lambda(&self, value: &Q) -> Result<Self> {
        self.map_assignment(|a, _| a.specialize_lambda(value))
    }
}

impl PartialEq for TransitionMap {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source && self.target == other.target && self.assignment == other.assignment
    }
}

impl fmt::Display for TransitionMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} -> {}", self.source.name, self.target.name)?;
        for (c, a) in self.target.coords().zip(&self.assignment) {
            writeln!(f, "  {c} = {a}")?;
        }
        Ok(())
    }
}

/// Pull `f` (in target coordinates) back to the source chart.
pub fn substitute(f: &SuperFrac, t: &TransitionMap) -> Result<SuperFrac> {
    Ok(f.substitute(&t.subst)?)
}

/// `t1: i -> j` followed by `t2: j -> k` gives `i -> k`.
pub fn compose(t1: &TransitionMap, t2: &TransitionMap) -> Result<TransitionMap> {
    if t1.target != t2.source {
        return Err(AtlasError::ChartMismatch(format!(
            "cannot compose {}->{} with {}->{}",
            t1.source.name, t1.target.name, t2.source.name, t2.target.name
        )));
    }
    let assignment = t2.assignment.iter().map(|a| substitute(a, t1)).collect::<Result<Vec<_>>>()?;
    TransitionMap::new(t1.ctx(), &t1.source, &t2.target, assignment)
}

/// `K[a][b] = d(target_b)/d(source_a)` with left derivatives.
fn forward_derivatives(t: &TransitionMap) -> Result<SuperMatrix> {
    let ctx = t.ctx();
    let svars = t.source.vars(ctx)?;
    let entries = svars.iter().map(|&v| t.assignment.iter().map(|a| a.partial_var(v)).collect()).collect();
    Ok(SuperMatrix::new(ctx, t.source.parities(), t.target.parities(), entries)?)
}

/// Row `r` is `d/d(target_r)` written in the basis `d/d(source_*)`.
pub fn jacobian(t: &TransitionMap) -> Result<SuperMatrix> {
    Ok(forward_derivatives(t)?.invert()?)
}

/// Inverse transition by super Newton iteration. The even body of `t` must
/// be monomial in the source evens with a unimodular exponent matrix.
pub fn invert_transition(t: &TransitionMap) -> Result<TransitionMap> {
    let ctx = t.ctx().clone();
    let label = format!("{}->{}", t.source.name, t.target.name);
    let fail = |msg: &str| AtlasError::NotInvertible(label.clone(), msg.to_string());
    let (s, tg) = (&t.source, &t.target);
    if s.even.len() != tg.even.len() || s.odd.len() != tg.odd.len() {
        return Err(fail("dimension mismatch"));
    }
    let n = s.even.len();
    let svar: Vec<usize> = s
        .even
        .iter()
        .map(|c| match ctx.var(c) {
            Ok(Var::Even(i)) => Ok(i),
            _ => Err(fail("source even coordinate is not an even generator")),
        })
        .collect::<Result<_>>()?;
    // body exponents E[b][a] and constants c_b
    let mut exps = vec![vec![0i64; n]; n];
    let mut consts = Vec::with_capacity(n);
    for b in 0..n {
        let body = t.assignment[b].body();
        let lp = body.as_laurent().ok_or_else(|| fail("body is not a Laurent monomial"))?;
        if lp.len() != 1 || lp.has_params() {
            return Err(fail("body is not a monomial"));
        }
        let (m, c) = lp.terms().iter().next().unwrap();
        for (a, &i) in svar.iter().enumerate() {
            exps[b][a] = m.even[i] as i64;
        }
        let others = m.even.iter().enumerate().any(|(i, &e)| e != 0 && !svar.contains(&i));
        if others {
            return Err(fail("body depends on foreign coordinates"));
        }
        consts.push(c.clone());
    }
    let inv = unimodular_inverse(&exps).ok_or_else(|| fail("exponent matrix is not unimodular"))?;
    // initial guess: S_a = prod_b (T_b / c_b)^inv[a][b], odd coordinates 0
    let mut guess = Vec::with_capacity(s.dim());
    for a in 0..n {
        let mut g = SuperFrac::one(&ctx);
        for b in 0..n {
            let e = inv[a][b] as i32;
            if e == 0 {
                continue;
            }
            let base = SuperFrac::var(&ctx, &tg.even[b])?.scale(&consts[b].recip());
            let p = if e > 0 { base.pow(e as u32) } else { base.invert_even()?.pow((-e) as u32) };
            g = g.checked_mul(&p)?;
        }
        guess.push(g);
    }
    for _ in &s.odd {
        guess.push(SuperFrac::zero(&ctx));
    }
    let k = forward_derivatives(t)?;
    let targets: Vec<SuperFrac> =
        tg.coords().map(|c| SuperFrac::var(&ctx, c)).collect::<std::result::Result<_, _>>()?;
    for _ in 0..10 {
        let g = TransitionMap::new(&ctx, tg, s, guess.clone())?;
        let err: Vec<SuperFrac> = t
            .assignment
            .iter()
            .zip(&targets)
            .map(|(f, y)| Ok(substitute(f, &g)?.checked_sub(y)?))
            .collect::<Result<_>>()?;
        if err.iter().all(SuperFrac::is_zero) {
            return Ok(g);
        }
        let kg = k.try_map(|e| e.substitute(g.substitution()))?;
        let kinv = kg.invert()?;
        // h = -err * K^-1
        for (a, slot) in guess.iter_mut().enumerate() {
            let mut h = SuperFrac::zero(&ctx);
            for (b, e) in err.iter().enumerate() {
                if !e.is_zero() {
                    h = h.checked_add(&e.checked_mul(kinv.get(b, a))?)?;
                }
            }
            *slot = slot.checked_sub(&h)?;
        }
    }
    Err(fail("Newton iteration did not terminate"))
}

fn unimodular_inverse(m: &[Vec<i64>]) -> Option<Vec<Vec<i64>>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<Q> = row.iter().map(|&x| Q::from_integer(x.into())).collect();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let piv = linalg::rref(&mut a);
    if piv.len() < n || piv[n - 1] >= n {
        return None;
    }
    a.iter()
        .map(|row| {
            row[n..].iter().map(|x| if x.is_integer() { i64::try_from(x.to_integer()).ok() } else { None }).collect()
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct VectorField {
    pub chart: Chart,
    /// Coefficients of `d/d(coord)`, aligned with `chart.coords()`.
    pub components: Vec<SuperFrac>,
}

impl VectorField {
    pub fn zero(ctx: &Ctx, chart: &Chart) -> Self {
        VectorField { chart: chart.clone(), components: vec![SuperFrac::zero(ctx); chart.dim()] }
    }

    pub fn parse(ctx: &Ctx, chart: &Chart, pairs: &[(&str, &str)]) -> Result<Self> {
        let mut v = VectorField::zero(ctx, chart);
        for (coord, expr) in pairs {
            let pos = chart
                .position(coord)
                .ok_or_else(|| AtlasError::ChartMismatch(format!("{coord} is not a coordinate of {}", chart.name)))?;
            v.components[pos] = v.components[pos].checked_add(&SuperFrac::parse(ctx, expr)?)?;
        }
        Ok(v)
    }

    pub fn ctx(&self) -> &Ctx {
        self.components[0].ctx()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(SuperFrac::is_zero)
    }

    pub fn component(&self, coord: &str) -> Option<&SuperFrac> {
        self.chart.position(coord).map(|i| &self.components[i])
    }

    /// Parity of the field when homogeneous (a zero field is even).
    pub fn parity(&self) -> Option<Parity> {
        let mut found: Option<Parity> = None;
        for (c, cp) in self.components.iter().zip(self.chart.parities()) {
            if c.is_zero() {
                continue;
            }
            let p = c.parity()? + cp;
            if found.is_some_and(|f| f != p) {
                return None;
            }
            found = Some(p);
        }
        Some(found.unwrap_or(Parity::Even))
    }

    pub fn try_map(&self, f: impl Fn(&SuperFrac) -> std::result::Result<SuperFrac, AlgebraError>) -> Result<Self> {
        let components = self.components.iter().map(f).collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(VectorField { chart: self.chart.clone(), components })
    }

    pub fn checked_add(&self, other: &VectorField) -> Result<Self> {
        if self.chart != other.chart {
            return Err(AtlasError::ChartMismatch("adding fields on different charts".into()));
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.checked_add(b))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(VectorField { chart: self.chart.clone(), components })
    }

    pub fn scale(&self, c: &Q) -> Self {
        VectorField { chart: self.chart.clone(), components: self.components.iter().map(|x| x.scale(c)).collect() }
    }

    /// Multiply every component on the left by `f`.
    pub fn left_mul(&self, f: &SuperFrac) -> Result<Self> {
        self.try_map(|x| f.checked_mul(x))
    }

    /// `v(f) = sum_a v_a d_a f`.
    pub fn apply(&self, f: &SuperFrac) -> Result<SuperFrac> {
        let ctx = f.ctx();
        let mut acc = SuperFrac::zero(ctx);
        for (c, coord) in self.components.iter().zip(self.chart.coords()) {
            if c.is_zero() {
                continue;
            }
            let d = f.partial(coord)?;
            if !d.is_zero() {
                acc = acc.checked_add(&c.checked_mul(&d)?)?;
            }
        }
        Ok(acc)
    }

    /// Graded commutator `[X, Y]^b = X(Y^b) - (-1)^{|X||Y|} Y(X^b)`.
    pub fn bracket(&self, other: &VectorField) -> Result<Self> {
        if self.chart != other.chart {
            return Err(AtlasError::ChartMismatch("bracket of fields on different charts".into()));
        }
        let (px, py) = match (self.parity(), other.parity()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(AtlasError::ParityMismatch("bracket of inhomogeneous fields".into())),
        };
        let sign_odd = px.is_odd() && py.is_odd();
        let mut components = Vec::with_capacity(self.components.len());
        for (xb, yb) in self.components.iter().zip(&other.components) {
            let a = self.apply(yb)?;
            let b = other.apply(xb)?;
            components.push(if sign_odd { a.checked_add(&b)? } else { a.checked_sub(&b)? });
        }
        Ok(VectorField { chart: self.chart.clone(), components })
    }

    /// No negative exponents and constant denominators in any component.
    pub fn is_regular(&self) -> bool {
        self.components.iter().all(SuperFrac::is_polynomial)
    }
}

impl PartialEq for VectorField {
    fn eq(&self, other: &Self) -> bool {
        self.chart == other.chart && self.components == other.components
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .components
            .iter()
            .zip(self.chart.coords())
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, coord)| format!("({c}) d/d{coord}"))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// `v` on `t.target` rewritten on `t.source`.
pub fn transport(v: &VectorField, t: &TransitionMap) -> Result<VectorField> {
    if v.chart != t.target {
        return Err(AtlasError::ChartMismatch(format!(
            "field lives on {}, map targets {}",
            v.chart.name, t.target.name
        )));
    }
    let jac = jacobian(t)?;
    let ctx = t.ctx();
    let pulled: Vec<SuperFrac> = v.components.iter().map(|c| substitute(c, t)).collect::<Result<_>>()?;
    let mut components = vec![SuperFrac::zero(ctx); t.source.dim()];
    for (r, c) in pulled.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for (a, slot) in components.iter_mut().enumerate() {
            let j = jac.get(r, a);
            if !j.is_zero() {
                *slot = slot.checked_add(&c.checked_mul(j)?)?;
            }
        }
    }
    Ok(VectorField { chart: t.source.clone(), components })
}

#[derive(Clone, Debug)]
pub struct Atlas {
    pub name: String,
    ctx: Ctx,
    charts: Vec<Chart>,
    transitions: BTreeMap<(usize, usize), TransitionMap>,
}

impl Atlas {
    /// Builds an atlas from authored maps; a missing direction is obtained
    /// by inverting the opposite one.
    pub fn new(name: &str, ctx: &Ctx, charts: Vec<Chart>, given: Vec<TransitionMap>) -> Result<Self> {
        let mut transitions = BTreeMap::new();
        let idx =
            |c: &Chart| charts.iter().position(|x| x == c).ok_or_else(|| AtlasError::UnknownChart(c.name.clone()));
        for t in given {
            let key = (idx(&t.source)?, idx(&t.target)?);
            transitions.insert(key, t);
        }
        for i in 0..charts.len() {
            transitions.insert((i, i), TransitionMap::identity(ctx, &charts[i])?);
        }
        for i in 0..charts.len() {
            for j in 0..charts.len() {
                if transitions.contains_key(&(i, j)) {
                    continue;
                }
                let back = transitions
                    .get(&(j, i))
                    .ok_or_else(|| AtlasError::MissingTransition(charts[i].name.clone(), charts[j].name.clone()))?;
                let inv = invert_transition(back)?;
                transitions.insert((i, j), inv);
            }
        }
        Ok(Atlas { name: name.to_string(), ctx: ctx.clone(), charts, transitions })
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn chart_index(&self, name: &str) -> Result<usize> {
        self.charts.iter().position(|c| c.name == name).ok_or_else(|| AtlasError::UnknownChart(name.into()))
    }

    /// Coordinates of chart `j` written in chart `i`.
    pub fn transition(&self, i: usize, j: usize) -> &TransitionMap {
        &self.transitions[&(i, j)]
    }

    pub fn transitions(&self) -> impl Iterator<Item = (&(usize, usize), &TransitionMap)> {
        self.transitions.iter()
    }

    pub fn try_map(&self, f: impl Fn(&TransitionMap) -> Result<TransitionMap>) -> Result<Self> {
        let transitions = self.transitions.iter().map(|(k, t)| Ok((*k, f(t)?))).collect::<Result<_>>()?;
        Ok(Atlas { name: self.name.clone(), ctx: self.ctx.clone(), charts: self.charts.clone(), transitions })
    }

    pub fn specialize_lambda(&self, value: &Q) -> Result<Self> {
        self.try_map(|t| t.specialize_lambda(value))
    }

    /// Replace one ordered transition (and nothing else); used for mutation tests.
    pub fn with_transition(&self, t: TransitionMap) -> Result<Self> {
        let key = (self.chart_index(&t.source.name)?, self.chart_index(&t.target.name)?);
        let mut out = self.clone();
        out.transitions.insert(key, t);
        Ok(out)
    }

    /// Move `v` onto chart `j`.
    pub fn transport_to(&self, v: &VectorField, j: usize) -> Result<VectorField> {
        let i = self.chart_index(&v.chart.name)?;
        if i == j {
            return Ok(v.clone());
        }
        transport(v, self.transition(j, i))
    }

    pub fn to_json(&self) -> Value {
        let charts: Vec<Value> =
            self.charts.iter().map(|c| json!({"name": c.name, "even": c.even, "odd": c.odd})).collect();
        let transitions: Vec<Value> = self
            .transitions
            .iter()
            .filter(|((i, j), _)| i != j)
            .map(|(_, t)| {
                let mut a = serde_json::Map::new();
                for (c, f) in t.target.coords().zip(&t.assignment) {
                    a.insert(c.clone(), frac_to_json(f));
                }
                json!({"source": t.source.name, "target": t.target.name, "assignments": a})
            })
            .collect();
        json!({
            "version": 1,
            "name": self.name,
            "context": context_to_json(&self.ctx),
            "charts": charts,
            "transitions": transitions,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| AtlasError::Json(m.to_string());
        if v.get("version").and_then(Value::as_u64) != Some(1) {
            return Err(bad("unsupported version"));
        }
        let ctx = context_from_json(v.get("context").ok_or_else(|| bad("missing context"))?)?;
        let names = |x: &Value, key: &str| -> Result<Vec<String>> {
            x.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| bad(key))?
                .iter()
                .map(|s| s.as_str().map(str::to_string).ok_or_else(|| bad(key)))
                .collect()
        };
        let mut charts = Vec::new();
        for c in v.get("charts").and_then(Value::as_array).ok_or_else(|| bad("missing charts"))? {
            let name = c.get("name").and_then(Value::as_str).ok_or_else(|| bad("chart name"))?;
            charts.push(Chart::new(name, &names(c, "even")?, &names(c, "odd")?));
        }
        let find =
            |n: &str| charts.iter().find(|c| c.name == n).cloned().ok_or_else(|| AtlasError::UnknownChart(n.into()));
        let mut given = Vec::new();
        for t in v.get("transitions").and_then(Value::as_array).ok_or_else(|| bad("missing transitions"))? {
            let s = find(t.get("source").and_then(Value::as_str).ok_or_else(|| bad("source"))?)?;
            let g = find(t.get("target").and_then(Value::as_str).ok_or_else(|| bad("target"))?)?;
            let a = t.get("assignments").and_then(Value::as_object).ok_or_else(|| bad("assignments"))?;
            let assignment = g
                .coords()
                .map(|c| {
                    let f = a.get(c).ok_or_else(|| AtlasError::ChartMismatch(format!("{c} not assigned")))?;
                    Ok(frac_from_json(&ctx, f)?)
                })
                .collect::<Result<Vec<_>>>()?;
            given.push(TransitionMap::new(&ctx, &s, &g, assignment)?);
        }
        let name = v.get("name").and_then(Value::as_str).unwrap_or("atlas");
        Atlas::new(name, &ctx, charts, given)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CocycleFailure {
    pub charts: Vec<String>,
    pub coord: String,
    pub residual: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CocycleReport {
    pub checked: usize,
    pub failures: Vec<CocycleFailure>,
}

impl CocycleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "checked": self.checked,
            "passed": self.passed(),
            "failures": self.failures.iter().map(|f| json!({
                "charts": f.charts, "coord": f.coord, "residual": f.residual
            })).collect::<Vec<_>>(),
        })
    }
}

/// `compose(t(i,j), t(j,k)) == t(i,k)` for all ordered triples, including
/// the degenerate ones `k == i` (round trips).
pub fn verify_cocycle(a: &Atlas) -> CocycleReport {
    let n = a.charts.len();
    let mut report = CocycleReport::default();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i == j || j == k {
                    continue;
                }
                report.checked += 1;
                let names = vec![a.charts[i].name.clone(), a.charts[j].name.clone(), a.charts[k].name.clone()];
                let composed = match compose(a.transition(i, j), a.transition(j, k)) {
                    Ok(c) => c,
                    Err(e) => {
                        report.failures.push(CocycleFailure {
                            charts: names,
                            coord: String::new(),
                            residual: e.to_string(),
                        });
                        continue;
                    }
                };
                let direct = a.transition(i, k);
                for ((coord, x), y) in direct.target.coords().zip(&composed.assignment).zip(&direct.assignment) {
                    if x != y {
                        let residual = x.checked_sub(y).map(|r| r.to_string()).unwrap_or_else(|e| e.to_string());
                        report.failures.push(CocycleFailure { charts: names.clone(), coord: coord.clone(), residual });
                    }
                }
            }
        }
    }
    report
}

/// A vector-valued 1-cochain entry: a combination of `d/d(even coords of
/// basis chart)` with coefficients written in `coeff` chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct CochainEntry {
    pub basis: usize,
    pub coeff: usize,
    pub components: Vec<SuperFrac>,
}

impl CochainEntry {
    pub fn is_zero(&self) -> bool {
        self.components.iter().all(SuperFrac::is_zero)
    }

    pub fn scale(&self, c: &Q) -> Self {
        CochainEntry { components: self.components.iter().map(|x| x.scale(c)).collect(), ..self.clone() }
    }

    pub fn checked_add(&self, o: &CochainEntry) -> Result<Self> {
        if (self.basis, self.coeff) != (o.basis, o.coeff) {
            return Err(AtlasError::ChartMismatch("cochain entries in different frames".into()));
        }
        let components = self
            .components
            .iter()
            .zip(&o.components)
            .map(|(a, b)| a.checked_add(b))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(CochainEntry { components, ..self.clone() })
    }

    pub fn display(&self, a: &Atlas) -> String {
        let chart = &a.charts[self.basis];
        let parts: Vec<String> = self
            .components
            .iter()
            .zip(&chart.even)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, coord)| format!("({c}) d/d{coord}"))
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// Entries keyed by ordered chart pair `(i, j)`: basis `i`, coefficients in `j`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VectorCochain {
    pub entries: BTreeMap<(usize, usize), CochainEntry>,
}

impl VectorCochain {
    pub fn is_zero(&self) -> bool {
        self.entries.values().all(CochainEntry::is_zero)
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&CochainEntry> {
        self.entries.get(&(i, j))
    }

    pub fn to_json(&self, a: &Atlas) -> Value {
        let items: Vec<Value> = self
            .entries
            .iter()
            .map(|((i, j), e)| json!({"pair": [a.charts[*i].name, a.charts[*j].name], "field": e.display(a)}))
            .collect();
        Value::Array(items)
    }
}

fn require_two_odd(a: &Atlas) -> Result<()> {
    for c in &a.charts {
        if c.odd.len() != 2 {
            return Err(AtlasError::OddCount(c.name.clone(), c.odd.len()));
        }
    }
    Ok(())
}

/// The part of the even transitions bilinear in the odd coordinates.
pub fn extract_omega(a: &Atlas) -> Result<VectorCochain> {
    require_two_odd(a)?;
    let mut out = VectorCochain::default();
    let n = a.charts.len();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let t = a.transition(j, i);
            let components = a.charts[i]
                .even
                .iter()
                .map(|c| t.get(c).unwrap().map_num(|p| p.filter(|m| m.odd_degree() == 2)))
                .collect();
            out.entries.insert((i, j), CochainEntry { basis: i, coeff: j, components });
        }
    }
    Ok(out)
}

/// Rewrite an entry in another frame, working modulo odd degree three.
pub fn convert_entry(a: &Atlas, e: &CochainEntry, basis: usize, coeff: usize) -> Result<CochainEntry> {
    let ctx = a.ctx();
    // coefficients: chart e.coeff -> chart coeff
    let red = a.transition(coeff, e.coeff).reduced()?;
    let mut comps: Vec<SuperFrac> = e.components.iter().map(|c| substitute(c, &red)).collect::<Result<_>>()?;
    if basis != e.basis {
        // d/d(x_old) = sum_b d(x_new_b)/d(x_old) d/d(x_new_b), bodies only
        let t = a.transition(e.basis, basis);
        let old = &a.charts[e.basis];
        let new = &a.charts[basis];
        let to_coeff = a.transition(coeff, e.basis).reduced()?;
        let mut out = vec![SuperFrac::zero(ctx); new.even.len()];
        for (ai, oc) in old.even.iter().enumerate() {
            if comps[ai].is_zero() {
                continue;
            }
            for (b, nc) in new.even.iter().enumerate() {
                let d = t.get(nc).unwrap().body().partial(oc)?;
                if d.is_zero() {
                    continue;
                }
                let d = substitute(&d, &to_coeff)?;
                out[b] = out[b].checked_add(&comps[ai].checked_mul(&d)?)?;
            }
        }
        comps = out;
    }
    Ok(CochainEntry { basis, coeff, components: comps })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OmegaReport {
    pub checked: usize,
    pub failures: Vec<CocycleFailure>,
}

impl OmegaReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `w_ij + w_jk - w_ik = 0` on every triple and `w_ij + w_ji = 0` on every
/// pair, each evaluated in a common frame.
pub fn verify_omega_cocycle(c: &VectorCochain, a: &Atlas) -> Result<OmegaReport> {
    let n = a.charts.len();
    let mut report = OmegaReport::default();
    let name = |i: usize| a.charts[i].name.clone();
    let get = |i: usize, j: usize| -> Result<CochainEntry> {
        c.get(i, j).cloned().ok_or_else(|| AtlasError::MissingTransition(name(i), name(j)))
    };
    let residual = |e: &CochainEntry| e.display(a);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            report.checked += 1;
            let back = convert_entry(a, &get(j, i)?, i, j)?;
            let s = get(i, j)?.checked_add(&back)?;
            if !s.is_zero() {
                report.failures.push(CocycleFailure {
                    charts: vec![name(i), name(j)],
                    coord: "antisymmetry".into(),
                    residual: residual(&s),
                });
            }
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                report.checked += 1;
                let wij = convert_entry(a, &get(i, j)?, i, k)?;
                let wjk = convert_entry(a, &get(j, k)?, i, k)?;
                let wik = get(i, k)?;
                let s = wij.checked_add(&wjk)?.checked_add(&wik.scale(&-Q::one()))?;
                if !s.is_zero() {
                    report.failures.push(CocycleFailure {
                        charts: vec![name(i), name(j), name(k)],
                        coord: "triple".into(),
                        residual: residual(&s),
                    });
                }
            }
        }
    }
    Ok(report)
}

/// Flatten a Laurent expression into `(monomial key, coefficient)` pairs.
pub(crate) fn laurent_terms(f: &SuperFrac) -> Result<Vec<(String, Q)>> {
    let p = f.as_laurent().ok_or_else(|| AtlasError::NotLaurent(f.to_string()))?;
    Ok(p.terms().iter().map(|(m, c)| (format!("{m:?}"), c.clone())).collect())
}

/// Linear system `sum_u x_u * vec_u = 0` assembled from symbolic vectors.
/// Each unknown contributes a list of expressions; rows are indexed by
/// (slot, monomial).
pub(crate) struct SymbolicSystem {
    keys: BTreeMap<(usize, String), usize>,
    cols: Vec<BTreeMap<usize, Q>>,
}

impl SymbolicSystem {
    pub fn new() -> Self {
        SymbolicSystem { keys: BTreeMap::new(), cols: Vec::new() }
    }

    /// Add a column; returns its index.
    pub fn push(&mut self, slots: &[SuperFrac]) -> Result<usize> {
        let mut col = BTreeMap::new();
        for (s, f) in slots.iter().enumerate() {
            for (k, c) in laurent_terms(f)? {
                let n = self.keys.len();
                let row = *self.keys.entry((s, k)).or_insert(n);
                *col.entry(row).or_insert_with(Q::zero) += c;
            }
        }
        self.cols.push(col);
        Ok(self.cols.len() - 1)
    }

    pub fn matrix(&self) -> Vec<Vec<Q>> {
        let mut m = vec![vec![Q::zero(); self.cols.len()]; self.keys.len()];
        for (j, col) in self.cols.iter().enumerate() {
            for (&r, c) in col {
                m[r][j] = c.clone();
            }
        }
        m
    }
}

/// Solve for scalars `s_t`, one per candidate term, such that
/// `w_ij = sum_t s_t * term_t` (terms keyed by `i < j`) is a cocycle.
/// Returns a nullspace basis.
pub fn solve_omega_signs(a: &Atlas, terms: &[((usize, usize), CochainEntry)]) -> Result<Vec<Vec<Q>>> {
    let n = a.charts.len();
    let mut rows: Vec<Vec<Q>> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let mut sys = SymbolicSystem::new();
                for (pair, e) in terms {
                    let v = if *pair == (i, j) || *pair == (j, k) {
                        convert_entry(a, e, i, k)?.components
                    } else if *pair == (i, k) {
                        e.scale(&-Q::one()).components
                    } else {
                        vec![SuperFrac::zero(a.ctx()); a.charts[i].even.len()]
                    };
                    sys.push(&v)?;
                }
                rows.extend(sys.matrix());
            }
        }
    }
    Ok(linalg::nullspace(&rows, terms.len()))
}

/// Is there a 0-cochain `c_i = (odd product of chart i) * sum p(x_i) d/dx_i`
/// with polynomial `p` of total degree `<= degree_bound` and
/// `c_i - c_j = w_ij` on every overlap?
pub fn omega_is_coboundary(a: &Atlas, w: &VectorCochain, degree_bound: u32) -> Result<bool> {
    require_two_odd(a)?;
    let ctx = a.ctx();
    let n = a.charts.len();
    // unknown basis: (chart, component, monomial)
    let mut unknowns: Vec<CochainEntry> = Vec::new();
    for (ci, chart) in a.charts.iter().enumerate() {
        let odd = SuperFrac::var(ctx, &chart.odd[0])?.checked_mul(&SuperFrac::var(ctx, &chart.odd[1])?)?;
        for exps in monomial_exponents(chart.even.len(), degree_bound) {
            let mut m = odd.clone();
            for (c, &e) in chart.even.iter().zip(&exps) {
                m = m.checked_mul(&SuperFrac::var(ctx, c)?.pow(e))?;
            }
            for comp in 0..chart.even.len() {
                let mut components = vec![SuperFrac::zero(ctx); chart.even.len()];
                components[comp] = m.clone();
                unknowns.push(CochainEntry { basis: ci, coeff: ci, components });
            }
        }
    }
    let mut rows: Vec<Vec<Q>> = Vec::new();
    let mut rhs: Vec<Q> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let target = w
                .get(i, j)
                .ok_or_else(|| AtlasError::MissingTransition(a.charts[i].name.clone(), a.charts[j].name.clone()))?;
            let mut sys = SymbolicSystem::new();
            for u in &unknowns {
                let v = if u.basis == i {
                    convert_entry(a, u, i, j)?.components
                } else if u.basis == j {
                    convert_entry(a, &u.scale(&-Q::one()), i, j)?.components
                } else {
                    vec![SuperFrac::zero(ctx); a.charts[i].even.len()]
                };
                sys.push(&v)?;
            }
            let tcol = sys.push(&target.components)?;
            for row in sys.matrix() {
                rhs.push(row[tcol].clone());
                rows.push(row[..tcol].to_vec());
            }
        }
    }
    Ok(linalg::solve(&rows, &rhs, unknowns.len()).is_some())
}

/// Exponent vectors of total degree `<= d` in `k` variables.
pub fn monomial_exponents(k: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(k: usize, d: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for e in 0..=d {
            cur.push(e);
            rec(k, d - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, d, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests;
