use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use super::context::{same_ctx, Ctx, Var};
use super::{AlgebraError, Parity, Q};

/// Laurent monomial in the even generators, ordinary monomial in the
/// parameters, and a set of odd generators (bit `i` = `odd_names[i]`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SuperMonomial {
    pub odd: u64,
    pub even: Vec<i32>,
    pub params: Vec<u32>,
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

/// Number of transpositions needed to sort the word `a ++ b` of odd
/// generators into canonical order.
fn odd_merge_swaps(a: u64, b: u64) -> u32 {
    bits(b)
        .map(|j| {
            let above = if j >= 63 { 0 } else { !((1u64 << (j + 1)) - 1) };
            (a & above).count_ones()
        })
        .sum()
}

impl SuperMonomial {
    pub fn one(ctx: &Ctx) -> Self {
        SuperMonomial { odd: 0, even: vec![0; ctx.even_names().len()], params: vec![0; ctx.param_names().len()] }
    }

    pub fn parity(&self) -> Parity {
        Parity::from_count(self.odd.count_ones())
    }

    pub fn odd_degree(&self) -> u32 {
        self.odd.count_ones()
    }

    pub fn odd_indices(&self) -> impl Iterator<Item = usize> {
        bits(self.odd)
    }

    pub fn is_unit_monomial(&self) -> bool {
        self.odd == 0 && self.even.iter().all(|&e| e == 0) && self.params.iter().all(|&p| p == 0)
    }

    pub fn has_negative_exponent(&self) -> bool {
        self.even.iter().any(|&e| e < 0)
    }

    /// Product with Koszul sign, `None` when an odd generator repeats.
    pub fn mul(&self, other: &SuperMonomial) -> Option<(bool, SuperMonomial)> {
        if self.odd & other.odd != 0 {
            return None;
        }
        let negative = odd_merge_swaps(self.odd, other.odd) % 2 == 1;
        let even = self.even.iter().zip(&other.even).map(|(a, b)| a + b).collect();
        let params = self.params.iter().zip(&other.params).map(|(a, b)| a + b).collect();
        Some((negative, SuperMonomial { odd: self.odd | other.odd, even, params }))
    }
}

/// Sparse supercommutative polynomial with rational coefficients.
#[derive(Clone)]
pub struct SuperPoly {
    ctx: Ctx,
    terms: BTreeMap<SuperMonomial, Q>,
}

impl SuperPoly {
    pub fn zero(ctx: &Ctx) -> Self {
        SuperPoly { ctx: ctx.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ctx: &Ctx, c: Q) -> Self {
        let mut p = SuperPoly::zero(ctx);
        p.add_term(SuperMonomial::one(ctx), c);
        p
    }

    pub fn one(ctx: &Ctx) -> Self {
        SuperPoly::constant(ctx, Q::one())
    }

    pub fn from_int(ctx: &Ctx, c: i64) -> Self {
        SuperPoly::constant(ctx, Q::from_integer(c.into()))
    }

    pub fn from_term(ctx: &Ctx, mono: SuperMonomial, c: Q) -> Self {
        let mut p = SuperPoly::zero(ctx);
        p.add_term(mono, c);
        p
    }

    /// The generator called `name`.
    pub fn var(ctx: &Ctx, name: &str) -> Result<Self, AlgebraError> {
        Ok(SuperPoly::generator(ctx, ctx.var(name)?))
    }

    pub fn generator(ctx: &Ctx, v: Var) -> Self {
        let mut m = SuperMonomial::one(ctx);
        match v {
            Var::Even(i) => m.even[i] = 1,
            Var::Odd(i) => m.odd = 1 << i,
            Var::Param(i) => m.params[i] = 1,
        }
        SuperPoly::from_term(ctx, m, Q::one())
    }

    /// `v^e` for an even generator, `e` may be negative.
    pub fn even_power(ctx: &Ctx, i: usize, e: i32) -> Self {
        let mut m = SuperMonomial::one(ctx);
        m.even[i] = e;
        SuperPoly::from_term(ctx, m, Q::one())
    }

    pub fn lambda(ctx: &Ctx) -> Self {
        SuperPoly::generator(ctx, Var::Param(ctx.lambda()))
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn terms(&self) -> &BTreeMap<SuperMonomial, Q> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<SuperMonomial, Q> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, mono: SuperMonomial, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Constant value if the polynomial has no generators at all.
    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_unit_monomial().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    /// Parity if homogeneous; zero counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|m| m.parity());
        let first = match it.next() {
            None => return Some(Parity::Even),
            Some(p) => p,
        };
        it.all(|p| p == first).then_some(first)
    }

    /// Every term has parity `p` (vacuous for zero).
    pub fn is_homogeneous(&self, p: Parity) -> bool {
        self.terms.keys().all(|m| m.parity() == p)
    }

    pub fn is_odd_free(&self) -> bool {
        self.terms.keys().all(|m| m.odd == 0)
    }

    pub fn has_params(&self) -> bool {
        self.terms.keys().any(|m| m.params.iter().any(|&e| e > 0))
    }

    pub fn has_negative_exponents(&self) -> bool {
        self.terms.keys().any(|m| m.has_negative_exponent())
    }

    /// Odd-free part.
    pub fn body(&self) -> SuperPoly {
        self.filter(|m| m.odd == 0)
    }

    /// Nilpotent remainder `self - body`.
    pub fn soul(&self) -> SuperPoly {
        self.filter(|m| m.odd != 0)
    }

    pub fn filter(&self, keep: impl Fn(&SuperMonomial) -> bool) -> SuperPoly {
        SuperPoly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Terms whose odd set is exactly `mask`, with the odd part removed.
    pub fn odd_component(&self, mask: u64) -> SuperPoly {
        let mut out = SuperPoly::zero(&self.ctx);
        for (m, c) in &self.terms {
            if m.odd == mask {
                let mut m2 = m.clone();
                m2.odd = 0;
                out.add_term(m2, c.clone());
            }
        }
        out
    }

    pub fn max_odd_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.odd_degree()).max().unwrap_or(0)
    }

    fn check(&self, other: &SuperPoly) -> Result<(), AlgebraError> {
        if same_ctx(&self.ctx, &other.ctx) {
            Ok(())
        } else {
            Err(AlgebraError::ContextMismatch)
        }
    }

    pub fn checked_add(&self, other: &SuperPoly) -> Result<SuperPoly, AlgebraError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &SuperPoly) -> Result<SuperPoly, AlgebraError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &SuperPoly) -> Result<SuperPoly, AlgebraError> {
        self.check(other)?;
        let mut out = SuperPoly::zero(&self.ctx);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((neg, m)) = ma.mul(mb) {
                    let c = ca * cb;
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Q) -> SuperPoly {
        if c.is_zero() {
            return SuperPoly::zero(&self.ctx);
        }
        SuperPoly { ctx: self.ctx.clone(), terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    /// Multiply by a unit even monomial `x^shift` (Laurent shift).
    pub fn shift_even(&self, shift: &[i32]) -> SuperPoly {
        SuperPoly {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut m2 = m.clone();
                    for (e, s) in m2.even.iter_mut().zip(shift) {
                        *e += s;
                    }
                    (m2, c.clone())
                })
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> SuperPoly {
        let mut acc = SuperPoly::one(&self.ctx);
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Replace a parameter by a rational value.
    pub fn specialize(&self, param: usize, value: &Q) -> SuperPoly {
        let mut out = SuperPoly::zero(&self.ctx);
        for (m, c) in &self.terms {
            let e = m.params[param];
            let mut m2 = m.clone();
            m2.params[param] = 0;
            let mut f = c.clone();
            for _ in 0..e {
                f *= value;
            }
            out.add_term(m2, f);
        }
        out
    }

    /// Derivative with respect to a generator; left derivative for odd ones.
    pub fn partial(&self, v: Var) -> SuperPoly {
        let mut out = SuperPoly::zero(&self.ctx);
        for (m, c) in &self.terms {
            match v {
                Var::Even(i) => {
                    let e = m.even[i];
                    if e != 0 {
                        let mut m2 = m.clone();
                        m2.even[i] = e - 1;
                        out.add_term(m2, c * Q::from_integer(e.into()));
                    }
                }
                Var::Param(i) => {
                    let e = m.params[i];
                    if e != 0 {
                        let mut m2 = m.clone();
                        m2.params[i] = e - 1;
                        out.add_term(m2, c * Q::from_integer(e.into()));
                    }
                }
                Var::Odd(i) => {
                    let bit = 1u64 << i;
                    if m.odd & bit != 0 {
                        let before = (m.odd & (bit - 1)).count_ones();
                        let mut m2 = m.clone();
                        m2.odd &= !bit;
                        out.add_term(m2, if before % 2 == 1 { -c.clone() } else { c.clone() });
                    }
                }
            }
        }
        out
    }

    /// Component-wise minimum of even exponents over all terms.
    pub fn min_even_exponents(&self) -> Option<Vec<i32>> {
        let mut it = self.terms.keys();
        let first = it.next()?.even.clone();
        Some(it.fold(first, |mut acc, m| {
            for (a, e) in acc.iter_mut().zip(&m.even) {
                *a = (*a).min(*e);
            }
            acc
        }))
    }

    /// Even generators (by index) that actually occur.
    pub fn even_support(&self) -> Vec<usize> {
        let n = self.ctx.even_names().len();
        (0..n).filter(|&i| self.terms.keys().any(|m| m.even[i] != 0)).collect()
    }

    pub fn odd_support(&self) -> u64 {
        self.terms.keys().fold(0, |acc, m| acc | m.odd)
    }

    /// Leading coefficient in the canonical term order.
    pub fn leading_coeff(&self) -> Option<&Q> {
        self.terms.values().next_back()
    }

    pub fn fmt_monomial(&self, m: &SuperMonomial) -> String {
        let ctx = &self.ctx;
        let mut parts = Vec::new();
        for (i, &e) in m.params.iter().enumerate() {
            if e == 1 {
                parts.push(ctx.param_names()[i].clone());
            } else if e > 1 {
                parts.push(format!("{}^{}", ctx.param_names()[i], e));
            }
        }
        for (i, &e) in m.even.iter().enumerate() {
            if e == 1 {
                parts.push(ctx.even_names()[i].clone());
            } else if e != 0 {
                parts.push(format!("{}^{}", ctx.even_names()[i], e));
            }
        }
        for i in m.odd_indices() {
            parts.push(ctx.odd_names()[i].clone());
        }
        parts.join("*")
    }
}

impl PartialEq for SuperPoly {
    fn eq(&self, other: &Self) -> bool {
        same_ctx(&self.ctx, &other.ctx) && self.terms == other.terms
    }
}

impl fmt::Debug for SuperPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SuperPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let mono = self.fmt_monomial(m);
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if mono.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{abs}*{mono}")?;
            }
        }
        Ok(())
    }
}

impl Add for &SuperPoly {
    type Output = SuperPoly;
    fn add(self, rhs: &SuperPoly) -> SuperPoly {
        self.checked_add(rhs).expect("context mismatch")
    }
}

impl Sub for &SuperPoly {
    type Output = SuperPoly;
    fn sub(self, rhs: &SuperPoly) -> SuperPoly {
        self.checked_sub(rhs).expect("context mismatch")
    }
}

impl Mul for &SuperPoly {
    type Output = SuperPoly;
    fn mul(self, rhs: &SuperPoly) -> SuperPoly {
        self.checked_mul(rhs).expect("context mismatch")
    }
}

impl Neg for &SuperPoly {
    type Output = SuperPoly;
    fn neg(self) -> SuperPoly {
        SuperPoly { ctx: self.ctx.clone(), terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }
}
