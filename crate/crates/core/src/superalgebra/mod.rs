//! Exact arithmetic in supercommutative rings: Laurent even generators,
//! square-zero odd generators with Koszul signs, a formal parameter
//! `lambda`, derivatives and matrices over the ring.

mod context;
mod frac;
pub mod json;
mod matrix;
mod parse;
mod poly;

use std::fmt;
use std::ops::Add;

use num_rational::BigRational;
use thiserror::Error;

pub use context::{Ctx, GeneratorContext, Var, LAMBDA, MAX_ODD};
pub use frac::{Substitution, SuperFrac};
pub use matrix::SuperMatrix;
pub use poly::{SuperMonomial, SuperPoly};

pub type Q = BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_count(n: u32) -> Parity {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }
}

impl Add for Parity {
    type Output = Parity;
    fn add(self, rhs: Parity) -> Parity {
        Parity::from_count((self.bit() + rhs.bit()) as u32)
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("operands live in different generator contexts")]
    ContextMismatch,
    #[error("cannot invert an element that is not even")]
    OddInverse,
    #[error("body of the element is zero, so it has no inverse")]
    NonInvertibleBody,
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("duplicate or empty generator name {0:?}")]
    DuplicateName(String),
    #[error("at most 64 odd generators are supported, got {0}")]
    TooManyOdd(usize),
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix has an entry that is not even")]
    OddEntry,
    #[error("no pivot with invertible body")]
    SingularBody,
    #[error("inverse failed the product check")]
    InverseCheck,
    #[error("matrix dimensions do not match")]
    Shape,
    #[error("evaluation point misses a variable")]
    UnboundVariable,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("json: {0}")]
    Json(String),
}

/// Product in the super ring.
pub fn mul(a: &SuperFrac, b: &SuperFrac) -> Result<SuperFrac, AlgebraError> {
    a.checked_mul(b)
}

/// `u^-1` for even `u` with nonzero body.
pub fn invert_even(u: &SuperFrac) -> Result<SuperFrac, AlgebraError> {
    u.invert_even()
}

/// Left derivative with respect to the generator `v`.
pub fn partial(f: &SuperFrac, v: &str) -> Result<SuperFrac, AlgebraError> {
    f.partial(v)
}

pub fn det_even(m: &SuperMatrix) -> Result<SuperFrac, AlgebraError> {
    m.det_even()
}

pub fn invert_matrix(m: &SuperMatrix) -> Result<SuperMatrix, AlgebraError> {
    m.invert()
}

#[cfg(test)]
mod tests;
