//! JSON shapes.
//!
//! A term is `{"coeff": "p/q", "even": {name: int}, "params": {name: int},
//! "odd": [names]}`; a polynomial is a list of terms; a fraction is
//! `{"num": [...], "den": [...]}`; a matrix is
//! `{"rows", "cols", "row_parities", "col_parities", "entries"}` with
//! entries row-major. Parities are `0` (even) and `1` (odd).

use serde_json::{json, Map, Value};

use super::context::{Ctx, GeneratorContext, Var};
use super::frac::SuperFrac;
use super::matrix::SuperMatrix;
use super::poly::{SuperMonomial, SuperPoly};
use super::{AlgebraError, Parity, Q};

fn bad(msg: impl Into<String>) -> AlgebraError {
    AlgebraError::Json(msg.into())
}

pub fn context_to_json(ctx: &GeneratorContext) -> Value {
    json!({
        "even": ctx.even_names(),
        "odd": ctx.odd_names(),
        "params": ctx.param_names(),
    })
}

pub fn context_from_json(v: &Value) -> Result<Ctx, AlgebraError> {
    let names = |key: &str| -> Result<Vec<String>, AlgebraError> {
        match v.get(key) {
            None => Ok(Vec::new()),
            Some(Value::Array(a)) => a
                .iter()
                .map(|x| x.as_str().map(str::to_string).ok_or_else(|| bad(format!("{key}: expected strings"))))
                .collect(),
            Some(_) => Err(bad(format!("{key}: expected array"))),
        }
    };
    GeneratorContext::new(&names("even")?, &names("odd")?, &names("params")?)
}

fn term_to_json(p: &SuperPoly, m: &SuperMonomial, c: &Q) -> Value {
    let ctx = p.ctx();
    let mut even = Map::new();
    for (i, &e) in m.even.iter().enumerate() {
        if e != 0 {
            even.insert(ctx.even_names()[i].clone(), json!(e));
        }
    }
    let mut params = Map::new();
    for (i, &e) in m.params.iter().enumerate() {
        if e != 0 {
            params.insert(ctx.param_names()[i].clone(), json!(e));
        }
    }
    let odd: Vec<&String> = m.odd_indices().map(|i| &ctx.odd_names()[i]).collect();
    json!({
        "coeff": c.to_string(),
        "even": even,
        "params": params,
        "odd": odd,
    })
}

pub fn poly_to_json(p: &SuperPoly) -> Value {
    Value::Array(p.terms().iter().map(|(m, c)| term_to_json(p, m, c)).collect())
}

fn parse_rational(s: &str) -> Result<Q, AlgebraError> {
    s.parse::<Q>().map_err(|_| bad(format!("bad coefficient {s:?}")))
}

pub fn poly_from_json(ctx: &Ctx, v: &Value) -> Result<SuperPoly, AlgebraError> {
    let arr = v.as_array().ok_or_else(|| bad("polynomial: expected array of terms"))?;
    let mut p = SuperPoly::zero(ctx);
    for t in arr {
        let coeff = t
            .get("coeff")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("term: missing coeff"))
            .and_then(parse_rational)?;
        let mut m = SuperMonomial::one(ctx);
        if let Some(even) = t.get("even").and_then(Value::as_object) {
            for (name, e) in even {
                let e = e.as_i64().and_then(|x| i32::try_from(x).ok()).ok_or_else(|| bad("even exponent"))?;
                match ctx.var(name)? {
                    Var::Even(i) => m.even[i] = e,
                    _ => return Err(bad(format!("{name} is not even"))),
                }
            }
        }
        if let Some(params) = t.get("params").and_then(Value::as_object) {
            for (name, e) in params {
                let e = e.as_u64().and_then(|x| u32::try_from(x).ok()).ok_or_else(|| bad("param exponent"))?;
                match ctx.var(name)? {
                    Var::Param(i) => m.params[i] = e,
                    _ => return Err(bad(format!("{name} is not a parameter"))),
                }
            }
        }
        // odd generators listed in any order; sort with sign
        let mut sign_negative = false;
        if let Some(odd) = t.get("odd").and_then(Value::as_array) {
            for name in odd {
                let name = name.as_str().ok_or_else(|| bad("odd name"))?;
                let i = match ctx.var(name)? {
                    Var::Odd(i) => i,
                    _ => return Err(bad(format!("{name} is not odd"))),
                };
                let bit = 1u64 << i;
                if m.odd & bit != 0 {
                    m.odd = u64::MAX;
                    break;
                }
                let above = if i >= 63 { 0 } else { !((1u64 << (i + 1)) - 1) };
                if (m.odd & above).count_ones() % 2 == 1 {
                    sign_negative = !sign_negative;
                }
                m.odd |= bit;
            }
        }
        if m.odd == u64::MAX {
            continue;
        }
        p.add_term(m, if sign_negative { -coeff } else { coeff });
    }
    Ok(p)
}

pub fn frac_to_json(f: &SuperFrac) -> Value {
    json!({ "num": poly_to_json(f.num()), "den": poly_to_json(f.den()) })
}

pub fn frac_from_json(ctx: &Ctx, v: &Value) -> Result<SuperFrac, AlgebraError> {
    let num = poly_from_json(ctx, v.get("num").ok_or_else(|| bad("fraction: missing num"))?)?;
    let den = match v.get("den") {
        None => SuperPoly::one(ctx),
        Some(d) => poly_from_json(ctx, d)?,
    };
    if !den.is_odd_free() || den.is_zero() {
        return Err(bad("fraction: denominator must be nonzero and free of odd generators"));
    }
    Ok(SuperFrac::from_parts_unchecked(num, den))
}

fn parities_to_json(ps: &[Parity]) -> Value {
    Value::Array(ps.iter().map(|p| json!(p.bit())).collect())
}

fn parities_from_json(v: Option<&Value>) -> Result<Vec<Parity>, AlgebraError> {
    v.and_then(Value::as_array)
        .ok_or_else(|| bad("parities: expected array"))?
        .iter()
        .map(|x| match x.as_u64() {
            Some(0) => Ok(Parity::Even),
            Some(1) => Ok(Parity::Odd),
            _ => Err(bad("parity must be 0 or 1")),
        })
        .collect()
}

pub fn matrix_to_json(m: &SuperMatrix) -> Value {
    let entries: Vec<Value> = m.entries().iter().flatten().map(frac_to_json).collect();
    json!({
        "rows": m.rows(),
        "cols": m.cols(),
        "row_parities": parities_to_json(m.row_parities()),
        "col_parities": parities_to_json(m.col_parities()),
        "entries": entries,
    })
}

pub fn matrix_from_json(ctx: &Ctx, v: &Value) -> Result<SuperMatrix, AlgebraError> {
    let rp = parities_from_json(v.get("row_parities"))?;
    let cp = parities_from_json(v.get("col_parities"))?;
    let flat = v.get("entries").and_then(Value::as_array).ok_or_else(|| bad("matrix: missing entries"))?;
    if flat.len() != rp.len() * cp.len() {
        return Err(AlgebraError::Shape);
    }
    let mut rows = Vec::with_capacity(rp.len());
    for r in 0..rp.len() {
        let row = (0..cp.len()).map(|c| frac_from_json(ctx, &flat[r * cp.len() + c])).collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    SuperMatrix::new(ctx, rp, cp, rows)
}
