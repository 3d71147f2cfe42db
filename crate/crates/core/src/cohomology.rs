//! Cohomology dimensions of line bundles on `P^n` and `P1 x P1`, twisted
//! tangent bundles through the Euler sequence, and formal sheaf sums with
//! parity.

use std::collections::HashMap;
use std::fmt;
use std::ops::Add;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg;
use crate::superalgebra::Q;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CohomError {
    #[error("cohomological degree {q} out of range for dimension {n}")]
    QOutOfRange { n: usize, q: usize },
    #[error("outside the oracle's size cap (n <= 3, |d| <= 12)")]
    SizeCap,
    #[error("exact sequence does not determine the unknown dimensions")]
    AmbiguousExactSequence,
    #[error("exact sequence data is inconsistent")]
    Inconsistent,
    #[error("unsupported atom: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CohomError>;

/// `even | odd` dimension.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct SuperDim {
    pub even: usize,
    pub odd: usize,
}

impl SuperDim {
    pub const ZERO: SuperDim = SuperDim { even: 0, odd: 0 };

    pub fn new(even: usize, odd: usize) -> Self {
        SuperDim { even, odd }
    }

    pub fn pi(self) -> Self {
        SuperDim { even: self.odd, odd: self.even }
    }

    pub fn times(self, k: usize) -> Self {
        SuperDim { even: self.even * k, odd: self.odd * k }
    }
}

impl Add for SuperDim {
    type Output = SuperDim;
    fn add(self, o: SuperDim) -> SuperDim {
        SuperDim { even: self.even + o.even, odd: self.odd + o.odd }
    }
}

impl fmt::Display for SuperDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.even, self.odd)
    }
}

fn binom(n: i64, k: i64) -> usize {
    if k < 0 || n < k {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// `h^q(P^n, O(d))`, closed form.
pub fn h_line(n: usize, d: i64, q: usize) -> Result<usize> {
    if q > n {
        return Err(CohomError::QOutOfRange { n, q });
    }
    let ni = n as i64;
    Ok(if q == 0 && d >= 0 {
        binom(ni + d, ni)
    } else if q == n && d < -ni {
        binom(-d - 1, ni)
    } else {
        0
    })
}

/// `h^q(P^n, O(d))` from the Čech complex of the standard cover, one
/// Laurent monomial at a time.
pub fn h_line_cech(n: usize, d: i64, q: usize) -> Result<usize> {
    if q > n {
        return Err(CohomError::QOutOfRange { n, q });
    }
    if n > 3 || d.abs() > 12 {
        return Err(CohomError::SizeCap);
    }
    // Outside this box a monomial mixes negative and nonnegative exponents
    // with a proper negative support; its complex is a cone (acyclic).
    let bound = d.abs() + n as i64 + 1;
    let k = n + 1;
    let mut by_support: HashMap<u32, usize> = HashMap::new();
    let mut exps = vec![-bound; k];
    loop {
        if exps.iter().sum::<i64>() == d {
            let neg = exps.iter().enumerate().filter(|(_, &e)| e < 0).fold(0u32, |m, (i, _)| m | 1 << i);
            *by_support.entry(neg).or_default() += 1;
        }
        let mut i = 0;
        loop {
            if i == k {
                let mut total = 0;
                for (neg, count) in by_support {
                    total += count * cech_dim(k, neg, q);
                }
                return Ok(total);
            }
            exps[i] += 1;
            if exps[i] <= bound {
                break;
            }
            exps[i] = -bound;
            i += 1;
        }
    }
}

/// `H^q` of the complex spanned by the faces `I` (|I| = p + 1) of the
/// simplex on `k` vertices that contain `neg`, with the Čech differential.
fn cech_dim(k: usize, neg: u32, q: usize) -> usize {
    let faces = |p: usize| -> Vec<u32> {
        (0u32..1 << k).filter(|&s| s.count_ones() as usize == p + 1 && s & neg == neg).collect()
    };
    let rank_d = |p: usize| -> usize {
        // d: C^p -> C^{p+1}
        if p + 1 >= k {
            return 0;
        }
        let src = faces(p);
        let dst = faces(p + 1);
        if src.is_empty() || dst.is_empty() {
            return 0;
        }
        let mut m = vec![vec![Q::zero(); src.len()]; dst.len()];
        for (r, &t) in dst.iter().enumerate() {
            for (pos, v) in (0..k).filter(|v| t >> v & 1 == 1).enumerate() {
                let s = t & !(1 << v);
                if let Some(c) = src.iter().position(|&x| x == s) {
                    m[r][c] = if pos % 2 == 0 { Q::one() } else { -Q::one() };
                }
            }
        }
        linalg::rank(&m)
    };
    let dim_c = faces(q).len();
    let into = if q == 0 { 0 } else { rank_d(q - 1) };
    dim_c - rank_d(q) - into
}

/// `h^q(P1 x P1, O(d1, d2))` by Künneth.
pub fn h_product(d1: i64, d2: i64, q: usize) -> Result<usize> {
    if q > 2 {
        return Err(CohomError::QOutOfRange { n: 2, q });
    }
    let mut total = 0;
    for i in 0..=q.min(1) {
        let j = q - i;
        if j <= 1 {
            total += h_line(1, d1, i)? * h_line(1, d2, j)?;
        }
    }
    Ok(total)
}

/// Constraint on the map leaving a slot of an exact sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapRank {
    Free,
    Zero,
    Injective,
    Surjective,
}

/// Solve `0 -> V0 -> V1 -> ... -> Vk -> 0` for the unknown dimensions.
/// `maps[i]` constrains `V_i -> V_{i+1}`. The answer must be unique.
pub fn les_solve(spaces: &[Option<usize>], maps: &[MapRank]) -> Result<Vec<usize>> {
    let k = spaces.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    if maps.len() + 1 != k {
        return Err(CohomError::Inconsistent);
    }
    // every constraint pins some rank r_j (of V_j -> V_{j+1}) to zero
    let mut zero = vec![false; k];
    zero[k - 1] = true;
    for (j, m) in maps.iter().enumerate() {
        match m {
            MapRank::Free => {}
            MapRank::Zero => zero[j] = true,
            MapRank::Injective if j > 0 => zero[j - 1] = true,
            MapRank::Surjective => zero[j + 1] = true,
            MapRank::Injective => {}
        }
    }
    let mut sols: Vec<Vec<usize>> = Vec::new();
    let mut ranks = Vec::with_capacity(k);
    les_search(spaces, &zero, &mut ranks, &mut sols);
    match sols.len() {
        0 => Err(CohomError::Inconsistent),
        1 => Ok(sols.pop().unwrap()),
        _ => Err(CohomError::AmbiguousExactSequence),
    }
}

fn les_search(spaces: &[Option<usize>], zero: &[bool], ranks: &mut Vec<usize>, sols: &mut Vec<Vec<usize>>) {
    if sols.len() > 1 {
        return;
    }
    let i = ranks.len();
    if i == spaces.len() {
        let dims: Vec<usize> = (0..i).map(|j| (if j == 0 { 0 } else { ranks[j - 1] }) + ranks[j]).collect();
        if !sols.contains(&dims) {
            sols.push(dims);
        }
        return;
    }
    let prev = if i == 0 { 0 } else { ranks[i - 1] };
    let candidates: Vec<usize> = match spaces[i] {
        Some(d) if d >= prev => vec![d - prev],
        Some(_) => vec![],
        // bounded by a known target; otherwise two values expose freedom
        None => (0..=spaces.get(i + 1).copied().flatten().unwrap_or(1)).collect(),
    };
    for r in candidates {
        if zero[i] && r != 0 {
            continue;
        }
        ranks.push(r);
        les_search(spaces, zero, ranks, sols);
        ranks.pop();
    }
}

/// `h^q(T_{P^n}(d))` for `n` in `{1, 2}` from the twisted Euler sequence
/// `0 -> O(d) -> O(d+1)^{n+1} -> T(d) -> 0`, using exactness only.
pub fn h_tangent_twist(n: usize, d: i64, q: usize) -> Result<usize> {
    if !(1..=2).contains(&n) {
        return Err(CohomError::Unsupported(format!("T on P{n}")));
    }
    if q > n {
        return Err(CohomError::QOutOfRange { n, q });
    }
    let mut spaces = Vec::new();
    for p in 0..=n {
        spaces.push(Some(h_line(n, d, p)?));
        spaces.push(Some((n + 1) * h_line(n, d + 1, p)?));
        spaces.push(None);
    }
    let maps = vec![MapRank::Free; spaces.len() - 1];
    let dims = les_solve(&spaces, &maps)?;
    Ok(dims[3 * q + 2])
}

// ---- formal sheaf expressions ----

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    P(usize),
    P1xP1,
}

impl Space {
    pub fn dim(self) -> usize {
        match self {
            Space::P(n) => n,
            Space::P1xP1 => 2,
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::P(n) => write!(f, "P{n}"),
            Space::P1xP1 => f.write_str("P1xP1"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtomKind {
    Line(i64),
    Line2(i64, i64),
    Tangent(i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Atom {
    pub kind: AtomKind,
    pub pi: bool,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SheafExpr {
    pub space: Space,
    pub atoms: Vec<Atom>,
}

/// Dimensions per `q = 0..=dim`.
pub type CohomologyTable = Vec<SuperDim>;

impl SheafExpr {
    /// Grammar: `term (+ term)* on SPACE`, with
    /// `term = [k[*]] [Pi] (O | O(d) | O(d1,d2) | T | T(d)) [^k]` and
    /// `SPACE = P1 | P2 | P3 | P1xP1`. An empty sum is written `0 on SPACE`.
    pub fn parse(src: &str) -> Result<SheafExpr> {
        let bad = |m: &str| CohomError::Parse(m.to_string());
        let (body, space) = src.rsplit_once(" on ").ok_or_else(|| bad("missing 'on <space>'"))?;
        let space = match space.trim() {
            "P1xP1" | "P1 x P1" => Space::P1xP1,
            s => {
                let n =
                    s.strip_prefix('P').and_then(|n| n.parse::<usize>().ok()).ok_or_else(|| bad("unknown space"))?;
                if n == 0 || n > 3 {
                    return Err(CohomError::Unsupported(format!("P{n}")));
                }
                Space::P(n)
            }
        };
        let mut atoms = Vec::new();
        let body = body.trim();
        if body != "0" {
            for term in split_terms(body) {
                atoms.push(parse_term(term.trim())?);
            }
        }
        let e = SheafExpr { space, atoms };
        e.check()?;
        Ok(e)
    }

    fn check(&self) -> Result<()> {
        for a in &self.atoms {
            let ok = match (a.kind, self.space) {
                (AtomKind::Line(_), Space::P(_)) => true,
                (AtomKind::Line2(..), Space::P1xP1) => true,
                (AtomKind::Tangent(_), Space::P(n)) => n <= 2,
                _ => false,
            };
            if !ok {
                return Err(CohomError::Unsupported(format!("{:?} on {}", a.kind, self.space)));
            }
        }
        Ok(())
    }

    pub fn pi(&self) -> SheafExpr {
        let atoms = self.atoms.iter().map(|a| Atom { pi: !a.pi, ..*a }).collect();
        SheafExpr { space: self.space, atoms }
    }

    pub fn sum(&self, o: &SheafExpr) -> Result<SheafExpr> {
        if self.space != o.space {
            return Err(CohomError::Unsupported("sum over different spaces".into()));
        }
        let mut atoms = self.atoms.clone();
        atoms.extend(&o.atoms);
        Ok(SheafExpr { space: self.space, atoms })
    }
}

fn split_terms(s: &str) -> Vec<&str> {
    // '+' inside parentheses belongs to a twist like O(+1)
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn parse_term(t: &str) -> Result<Atom> {
    let bad = |m: String| CohomError::Parse(m);
    let mut rest = t;
    let mut mult = 1usize;
    let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
    if !digits.is_empty() {
        mult = digits.parse().map_err(|_| bad(format!("bad multiplicity in {t:?}")))?;
        rest = rest[digits.len()..].trim_start();
        rest = rest.strip_prefix('*').unwrap_or(rest).trim_start();
    }
    let mut pi = false;
    if let Some(r) = rest.strip_prefix("Pi") {
        pi = true;
        rest = r.trim_start();
    }
    if let Some((a, k)) = rest.rsplit_once('^') {
        let k: usize = k.trim().parse().map_err(|_| bad(format!("bad exponent in {t:?}")))?;
        mult *= k;
        rest = a.trim_end();
    }
    let (head, args) = match rest.find('(') {
        Some(p) => {
            let inner = rest[p..]
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| bad(format!("unbalanced parentheses in {t:?}")))?;
            let nums = inner
                .split(',')
                .map(|x| x.trim().trim_start_matches('+').parse::<i64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad(format!("bad twist in {t:?}")))?;
            (rest[..p].trim(), nums)
        }
        None => (rest.trim(), vec![0]),
    };
    let kind = match (head, args.as_slice()) {
        ("O", [d]) => AtomKind::Line(*d),
        ("O", [a, b]) => AtomKind::Line2(*a, *b),
        ("T", [d]) => AtomKind::Tangent(*d),
        _ => return Err(bad(format!("unknown atom {t:?}"))),
    };
    Ok(Atom { kind, pi, multiplicity: mult })
}

fn eval_atom(space: Space, a: &Atom, q: usize) -> Result<usize> {
    match (a.kind, space) {
        (AtomKind::Line(d), Space::P(n)) => h_line(n, d, q),
        (AtomKind::Line2(d1, d2), Space::P1xP1) => h_product(d1, d2, q),
        (AtomKind::Tangent(d), Space::P(n)) => h_tangent_twist(n, d, q),
        (k, s) => Err(CohomError::Unsupported(format!("{k:?} on {s}"))),
    }
}

pub fn eval_sheaf(e: &SheafExpr, q: usize) -> Result<SuperDim> {
    if q > e.space.dim() {
        return Err(CohomError::QOutOfRange { n: e.space.dim(), q });
    }
    let mut total = SuperDim::ZERO;
    for a in &e.atoms {
        let h = eval_atom(e.space, a, q)? * a.multiplicity;
        let d = SuperDim::new(h, 0);
        total = total + if a.pi { d.pi() } else { d };
    }
    Ok(total)
}

pub fn cohomology_table(e: &SheafExpr) -> Result<CohomologyTable> {
    (0..=e.space.dim()).map(|q| eval_sheaf(e, q)).collect()
}

/// `T/J^2 T` of the non-projected plane, split into line bundles and twisted
/// tangent bundles.
pub const QUOTIENT_DECOMPOSITION: &str = "T + O(1) + O^2 + O(-1) + Pi T(-2) + Pi T(-1) + Pi O(2) + Pi O(1) on P2";

/// `J^2 T`, the restriction of the tangent sheaf twisted by `O(-3)`.
pub const SQUARE_IDEAL_PART: &str = "T(-3) + Pi O(-2) + Pi O(-1) on P2";

#[cfg(test)]
mod tests;
