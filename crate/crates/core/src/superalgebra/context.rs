use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::AlgebraError;

/// Maximum number of odd generators; odd sets are stored as a `u64` mask.
pub const MAX_ODD: usize = 64;

/// Name of the formal parameter every context carries.
pub const LAMBDA: &str = "lambda";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    Even(usize),
    Odd(usize),
    Param(usize),
}

/// Generator names of a supercommutative ring. The order of `odd` is the
/// canonical order used for sign normalization.
#[derive(Clone)]
pub struct GeneratorContext {
    even: Vec<String>,
    odd: Vec<String>,
    params: Vec<String>,
    index: HashMap<String, Var>,
}

pub type Ctx = Arc<GeneratorContext>;

impl GeneratorContext {
    /// Builds a context. `"lambda"` is appended to the parameters if absent.
    pub fn new<S: AsRef<str>>(even: &[S], odd: &[S], params: &[S]) -> Result<Ctx, AlgebraError> {
        let even: Vec<String> = even.iter().map(|s| s.as_ref().to_string()).collect();
        let odd: Vec<String> = odd.iter().map(|s| s.as_ref().to_string()).collect();
        let mut params: Vec<String> = params.iter().map(|s| s.as_ref().to_string()).collect();
        if !params.iter().any(|p| p == LAMBDA) {
            params.push(LAMBDA.to_string());
        }
        if odd.len() > MAX_ODD {
            return Err(AlgebraError::TooManyOdd(odd.len()));
        }
        let mut index = HashMap::new();
        let all = even
            .iter()
            .enumerate()
            .map(|(i, n)| (n, Var::Even(i)))
            .chain(odd.iter().enumerate().map(|(i, n)| (n, Var::Odd(i))))
            .chain(params.iter().enumerate().map(|(i, n)| (n, Var::Param(i))));
        for (name, v) in all {
            if name.is_empty() || index.insert(name.clone(), v).is_some() {
                return Err(AlgebraError::DuplicateName(name.clone()));
            }
        }
        Ok(Arc::new(GeneratorContext { even, odd, params, index }))
    }

    pub fn even_names(&self) -> &[String] {
        &self.even
    }

    pub fn odd_names(&self) -> &[String] {
        &self.odd
    }

    pub fn param_names(&self) -> &[String] {
        &self.params
    }

    pub fn lookup(&self, name: &str) -> Option<Var> {
        self.index.get(name).copied()
    }

    pub fn var(&self, name: &str) -> Result<Var, AlgebraError> {
        self.lookup(name).ok_or_else(|| AlgebraError::UnknownVariable(name.to_string()))
    }

    pub fn name(&self, v: Var) -> &str {
        match v {
            Var::Even(i) => &self.even[i],
            Var::Odd(i) => &self.odd[i],
            Var::Param(i) => &self.params[i],
        }
    }

    pub fn lambda(&self) -> usize {
        match self.index[LAMBDA] {
            Var::Param(i) => i,
            _ => unreachable!("lambda is always a parameter"),
        }
    }

    /// Structural equality of the three name lists.
    pub fn same_as(&self, other: &GeneratorContext) -> bool {
        self.even == other.even && self.odd == other.odd && self.params == other.params
    }
}

impl PartialEq for GeneratorContext {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl Eq for GeneratorContext {}

impl fmt::Debug for GeneratorContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorContext")
            .field("even", &self.even)
            .field("odd", &self.odd)
            .field("params", &self.params)
            .finish()
    }
}

pub(crate) fn same_ctx(a: &Ctx, b: &Ctx) -> bool {
    Arc::ptr_eq(a, b) || a.same_as(b)
}
