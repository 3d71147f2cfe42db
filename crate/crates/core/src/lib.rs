#![allow(clippy::needless_range_loop)]

pub mod atlas;
pub mod cli;
pub mod cohomology;
pub mod embedding;
pub mod grassmannian;
pub mod linalg;
pub mod p2family;
pub mod selftest;
pub mod superalgebra;
