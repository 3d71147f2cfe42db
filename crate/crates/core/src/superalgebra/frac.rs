use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::context::{same_ctx, Ctx, Var};
use super::poly::{SuperMonomial, SuperPoly};
use super::{AlgebraError, Parity, Q};

/// `num / den` with `den` even, free of odd generators and nonzero.
/// Equality is cross-multiplication.
#[derive(Clone)]
pub struct SuperFrac {
    num: SuperPoly,
    den: SuperPoly,
}

/// `den^-1` as a finite series when `den = b + s` has a nilpotent soul `s`:
/// returns `(S, b^(k+1))` with `den * S = b^(k+1)`.
fn rationalize(den: &SuperPoly) -> (SuperPoly, SuperPoly) {
    let ctx = den.ctx();
    let b = den.body();
    let s = den.soul();
    if s.is_zero() {
        return (SuperPoly::one(ctx), den.clone());
    }
    let neg_s = -&s;
    // powers (-s)^i until they vanish
    let mut powers = vec![SuperPoly::one(ctx)];
    loop {
        let next = powers.last().unwrap() * &neg_s;
        if next.is_zero() {
            break;
        }
        powers.push(next);
    }
    let k = powers.len() - 1;
    let mut series = SuperPoly::zero(ctx);
    let mut bpow = SuperPoly::one(ctx);
    // sum_{i} (-s)^i b^(k-i), built from i = k down to 0
    for i in (0..=k).rev() {
        series = &series + &(&powers[i] * &bpow);
        if i > 0 {
            bpow = &bpow * &b;
        }
    }
    let new_den = &bpow * &b;
    (series, new_den)
}

impl SuperFrac {
    pub fn from_poly(p: SuperPoly) -> Self {
        let den = SuperPoly::one(p.ctx());
        SuperFrac { num: p, den }
    }

    /// General constructor; rationalizes a nilpotent denominator.
    pub fn new(num: SuperPoly, den: SuperPoly) -> Result<Self, AlgebraError> {
        if !same_ctx(num.ctx(), den.ctx()) {
            return Err(AlgebraError::ContextMismatch);
        }
        if !den.is_homogeneous(Parity::Even) {
            return Err(AlgebraError::OddInverse);
        }
        if den.body().is_zero() {
            return Err(AlgebraError::NonInvertibleBody);
        }
        let (series, den) = rationalize(&den);
        let num = &num * &series;
        Ok(SuperFrac::normalize(num, den))
    }

    /// Rebuild from stored parts without normalizing (used by the JSON reader).
    pub(crate) fn from_parts_unchecked(num: SuperPoly, den: SuperPoly) -> Self {
        SuperFrac { num, den }
    }

    pub fn zero(ctx: &Ctx) -> Self {
        SuperFrac::from_poly(SuperPoly::zero(ctx))
    }

    pub fn one(ctx: &Ctx) -> Self {
        SuperFrac::from_poly(SuperPoly::one(ctx))
    }

    pub fn constant(ctx: &Ctx, c: Q) -> Self {
        SuperFrac::from_poly(SuperPoly::constant(ctx, c))
    }

    pub fn from_int(ctx: &Ctx, c: i64) -> Self {
        SuperFrac::from_poly(SuperPoly::from_int(ctx, c))
    }

    pub fn var(ctx: &Ctx, name: &str) -> Result<Self, AlgebraError> {
        Ok(SuperFrac::from_poly(SuperPoly::var(ctx, name)?))
    }

    pub fn generator(ctx: &Ctx, v: Var) -> Self {
        SuperFrac::from_poly(SuperPoly::generator(ctx, v))
    }

    pub fn lambda(ctx: &Ctx) -> Self {
        SuperFrac::from_poly(SuperPoly::lambda(ctx))
    }

    /// Parse an arithmetic expression over the context's generators.
    pub fn parse(ctx: &Ctx, src: &str) -> Result<Self, AlgebraError> {
        super::parse::parse_expr(ctx, src)
    }

    pub fn ctx(&self) -> &Ctx {
        self.num.ctx()
    }

    pub fn num(&self) -> &SuperPoly {
        &self.num
    }

    pub fn den(&self) -> &SuperPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    pub fn parity(&self) -> Option<Parity> {
        self.num.parity()
    }

    pub fn is_homogeneous(&self, p: Parity) -> bool {
        self.num.is_homogeneous(p)
    }

    /// Denominator is a nonzero constant.
    pub fn is_laurent(&self) -> bool {
        self.den.as_constant().is_some()
    }

    /// Regular on the chart: constant denominator and no negative exponents.
    pub fn is_polynomial(&self) -> bool {
        self.is_laurent() && !self.num.has_negative_exponents()
    }

    /// Numerator divided by a constant denominator.
    pub fn as_laurent(&self) -> Option<SuperPoly> {
        let c = self.den.as_constant()?;
        Some(self.num.scale(&c.recip()))
    }

    pub fn as_constant(&self) -> Option<Q> {
        let c = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(c / d)
    }

    /// Odd-free part.
    pub fn body(&self) -> SuperFrac {
        SuperFrac { num: self.num.body(), den: self.den.clone() }
    }

    pub fn map_num(&self, f: impl Fn(&SuperPoly) -> SuperPoly) -> SuperFrac {
        SuperFrac::normalize(f(&self.num), self.den.clone())
    }

    /// Cancel Laurent monomial content and absorb monomial denominators.
    fn normalize(num: SuperPoly, den: SuperPoly) -> SuperFrac {
        let ctx = num.ctx().clone();
        if num.is_zero() {
            return SuperFrac::zero(&ctx);
        }
        if den.len() == 1 {
            let (m, c) = den.terms().iter().next().unwrap();
            if m.odd == 0 && m.params.iter().all(|&p| p == 0) {
                let shift: Vec<i32> = m.even.iter().map(|e| -e).collect();
                let num = num.shift_even(&shift).scale(&c.recip());
                return SuperFrac { num, den: SuperPoly::one(&ctx) };
            }
        }
        let shift: Vec<i32> = den.min_even_exponents().unwrap().iter().map(|e| -e).collect();
        let lc = den.leading_coeff().unwrap().recip();
        let num = num.shift_even(&shift).scale(&lc);
        let den = den.shift_even(&shift).scale(&lc);
        SuperFrac { num, den }
    }

    fn check(&self, other: &SuperFrac) -> Result<(), AlgebraError> {
        if same_ctx(self.ctx(), other.ctx()) {
            Ok(())
        } else {
            Err(AlgebraError::ContextMismatch)
        }
    }

    pub fn checked_add(&self, other: &SuperFrac) -> Result<SuperFrac, AlgebraError> {
        self.check(other)?;
        if self.den == other.den {
            return Ok(SuperFrac::normalize(&self.num + &other.num, self.den.clone()));
        }
        let num = &(&self.num * &other.den) + &(&other.num * &self.den);
        Ok(SuperFrac::normalize(num, &self.den * &other.den))
    }

    pub fn checked_sub(&self, other: &SuperFrac) -> Result<SuperFrac, AlgebraError> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &SuperFrac) -> Result<SuperFrac, AlgebraError> {
        self.check(other)?;
        let num = &self.num * &other.num;
        if num.is_zero() {
            return Ok(SuperFrac::zero(self.ctx()));
        }
        let den = if self.den.is_one() {
            other.den.clone()
        } else if other.den.is_one() {
            self.den.clone()
        } else {
            &self.den * &other.den
        };
        Ok(SuperFrac::normalize(num, den))
    }

    pub fn scale(&self, c: &Q) -> SuperFrac {
        SuperFrac::normalize(self.num.scale(c), self.den.clone())
    }

    pub fn pow(&self, n: u32) -> SuperFrac {
        SuperFrac::normalize(self.num.pow(n), self.den.pow(n))
    }

    /// Inverse of an even element with invertible body.
    pub fn invert_even(&self) -> Result<SuperFrac, AlgebraError> {
        match self.num.parity() {
            Some(Parity::Even) if !self.num.is_zero() => {}
            Some(Parity::Even) => return Err(AlgebraError::NonInvertibleBody),
            _ => return Err(AlgebraError::OddInverse),
        }
        if self.num.body().is_zero() {
            return Err(AlgebraError::NonInvertibleBody);
        }
        SuperFrac::new(self.den.clone(), self.num.clone())
    }

    pub fn checked_div(&self, other: &SuperFrac) -> Result<SuperFrac, AlgebraError> {
        self.checked_mul(&other.invert_even()?)
    }

    pub fn partial_var(&self, v: Var) -> SuperFrac {
        let dn = self.num.partial(v);
        match v {
            Var::Odd(_) => SuperFrac::normalize(dn, self.den.clone()),
            _ => {
                let dd = self.den.partial(v);
                if dd.is_zero() {
                    return SuperFrac::normalize(dn, self.den.clone());
                }
                let num = &(&dn * &self.den) - &(&self.num * &dd);
                SuperFrac::normalize(num, &self.den * &self.den)
            }
        }
    }

    /// Derivative by name; left derivative for odd generators.
    pub fn partial(&self, name: &str) -> Result<SuperFrac, AlgebraError> {
        Ok(self.partial_var(self.ctx().var(name)?))
    }

    pub fn specialize(&self, param: usize, value: &Q) -> Result<SuperFrac, AlgebraError> {
        let num = self.num.specialize(param, value);
        let den = self.den.specialize(param, value);
        if den.is_zero() {
            return Err(AlgebraError::NonInvertibleBody);
        }
        Ok(SuperFrac::normalize(num, den))
    }

    pub fn specialize_lambda(&self, value: &Q) -> Result<SuperFrac, AlgebraError> {
        let l = self.ctx().lambda();
        self.specialize(l, value)
    }

    /// Ring homomorphism sending each mapped generator to its image.
    pub fn substitute(&self, s: &Substitution) -> Result<SuperFrac, AlgebraError> {
        let n = s.apply_poly(&self.num)?;
        if self.den.is_one() {
            return Ok(n);
        }
        let d = s.apply_poly(&self.den)?;
        n.checked_div(&d)
    }

    /// Evaluate even generators at rationals; odd generators are sent to 0.
    pub fn eval_body(&self, point: &HashMap<Var, Q>) -> Result<Q, AlgebraError> {
        let eval = |p: &SuperPoly| -> Result<Q, AlgebraError> {
            let mut acc = Q::zero();
            for (m, c) in p.terms() {
                if m.odd != 0 {
                    continue;
                }
                let mut t = c.clone();
                for (i, &e) in m.even.iter().enumerate() {
                    if e != 0 {
                        let x = point.get(&Var::Even(i)).ok_or(AlgebraError::UnboundVariable)?;
                        if x.is_zero() && e < 0 {
                            return Err(AlgebraError::NonInvertibleBody);
                        }
                        t *= pow_q(x, e);
                    }
                }
                for (i, &e) in m.params.iter().enumerate() {
                    if e != 0 {
                        let x = point.get(&Var::Param(i)).ok_or(AlgebraError::UnboundVariable)?;
                        t *= pow_q(x, e as i32);
                    }
                }
                acc += t;
            }
            Ok(acc)
        };
        let d = eval(&self.den)?;
        if d.is_zero() {
            return Err(AlgebraError::NonInvertibleBody);
        }
        Ok(eval(&self.num)? / d)
    }
}

fn pow_q(x: &Q, e: i32) -> Q {
    let mut acc = Q::one();
    for _ in 0..e.unsigned_abs() {
        acc *= x;
    }
    if e < 0 {
        acc.recip()
    } else {
        acc
    }
}

/// Images of generators for [`SuperFrac::substitute`]; unmapped generators
/// are left alone.
#[derive(Clone, Debug, Default)]
pub struct Substitution {
    images: HashMap<Var, SuperFrac>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn insert(&mut self, v: Var, image: SuperFrac) {
        self.images.insert(v, image);
    }

    pub fn get(&self, v: Var) -> Option<&SuperFrac> {
        self.images.get(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &SuperFrac)> {
        self.images.iter()
    }

    fn apply_poly(&self, p: &SuperPoly) -> Result<SuperFrac, AlgebraError> {
        let ctx = p.ctx();
        let mut inverses: HashMap<Var, SuperFrac> = HashMap::new();
        let mut powers: HashMap<(Var, i32), SuperFrac> = HashMap::new();
        let mut acc = SuperFrac::zero(ctx);
        for (m, c) in p.terms() {
            // untouched generators stay in a residual monomial
            let mut rest = SuperMonomial::one(ctx);
            let mut factor = SuperFrac::constant(ctx, c.clone());
            for (i, &e) in m.even.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let v = Var::Even(i);
                match self.images.get(&v) {
                    None => rest.even[i] = e,
                    Some(img) => {
                        let key = (v, e);
                        if let std::collections::hash_map::Entry::Vacant(slot) = powers.entry(key) {
                            let base = if e < 0 {
                                if let std::collections::hash_map::Entry::Vacant(slot) = inverses.entry(v) {
                                    slot.insert(img.invert_even()?);
                                }
                                inverses[&v].clone()
                            } else {
                                img.clone()
                            };
                            slot.insert(base.pow(e.unsigned_abs()));
                        }
                        factor = factor.checked_mul(&powers[&key])?;
                    }
                }
            }
            for (i, &e) in m.params.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let v = Var::Param(i);
                match self.images.get(&v) {
                    None => rest.params[i] = e,
                    Some(img) => factor = factor.checked_mul(&img.pow(e))?,
                }
            }
            let mut odd_part = SuperFrac::one(ctx);
            for i in m.odd_indices() {
                let v = Var::Odd(i);
                let img = match self.images.get(&v) {
                    None => SuperFrac::generator(ctx, v),
                    Some(img) => img.clone(),
                };
                odd_part = odd_part.checked_mul(&img)?;
            }
            let rest = SuperFrac::from_poly(SuperPoly::from_term(ctx, rest, Q::one()));
            let term = rest.checked_mul(&factor)?.checked_mul(&odd_part)?;
            acc = acc.checked_add(&term)?;
        }
        Ok(acc)
    }
}

impl PartialEq for SuperFrac {
    fn eq(&self, other: &Self) -> bool {
        if !same_ctx(self.ctx(), other.ctx()) {
            return false;
        }
        if self.den == other.den {
            return self.num == other.num;
        }
        &self.num * &other.den == &other.num * &self.den
    }
}

impl fmt::Debug for SuperFrac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SuperFrac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl Add for &SuperFrac {
    type Output = SuperFrac;
    fn add(self, rhs: &SuperFrac) -> SuperFrac {
        self.checked_add(rhs).expect("context mismatch")
    }
}

impl Sub for &SuperFrac {
    type Output = SuperFrac;
    fn sub(self, rhs: &SuperFrac) -> SuperFrac {
        self.checked_sub(rhs).expect("context mismatch")
    }
}

impl Mul for &SuperFrac {
    type Output = SuperFrac;
    fn mul(self, rhs: &SuperFrac) -> SuperFrac {
        self.checked_mul(rhs).expect("context mismatch")
    }
}

impl Neg for &SuperFrac {
    type Output = SuperFrac;
    fn neg(self) -> SuperFrac {
        SuperFrac { num: -&self.num, den: self.den.clone() }
    }
}
