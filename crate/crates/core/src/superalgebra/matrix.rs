use std::fmt;

use super::context::{same_ctx, Ctx};
use super::frac::SuperFrac;
use super::{AlgebraError, Parity};

/// Rectangular matrix of [`SuperFrac`] with row and column parities.
#[derive(Clone)]
pub struct SuperMatrix {
    ctx: Ctx,
    row_parities: Vec<Parity>,
    col_parities: Vec<Parity>,
    entries: Vec<Vec<SuperFrac>>,
}

impl SuperMatrix {
    pub fn new(
        ctx: &Ctx,
        row_parities: Vec<Parity>,
        col_parities: Vec<Parity>,
        entries: Vec<Vec<SuperFrac>>,
    ) -> Result<Self, AlgebraError> {
        if entries.len() != row_parities.len() || entries.iter().any(|r| r.len() != col_parities.len()) {
            return Err(AlgebraError::Shape);
        }
        if entries.iter().flatten().any(|e| !same_ctx(e.ctx(), ctx)) {
            return Err(AlgebraError::ContextMismatch);
        }
        Ok(SuperMatrix { ctx: ctx.clone(), row_parities, col_parities, entries })
    }

    pub fn zeros(ctx: &Ctx, row_parities: Vec<Parity>, col_parities: Vec<Parity>) -> Self {
        let entries = vec![vec![SuperFrac::zero(ctx); col_parities.len()]; row_parities.len()];
        SuperMatrix { ctx: ctx.clone(), row_parities, col_parities, entries }
    }

    pub fn identity(ctx: &Ctx, parities: Vec<Parity>) -> Self {
        let mut m = SuperMatrix::zeros(ctx, parities.clone(), parities);
        for i in 0..m.rows() {
            m.entries[i][i] = SuperFrac::one(ctx);
        }
        m
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn rows(&self) -> usize {
        self.row_parities.len()
    }

    pub fn cols(&self) -> usize {
        self.col_parities.len()
    }

    pub fn row_parities(&self) -> &[Parity] {
        &self.row_parities
    }

    pub fn col_parities(&self) -> &[Parity] {
        &self.col_parities
    }

    pub fn get(&self, r: usize, c: usize) -> &SuperFrac {
        &self.entries[r][c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: SuperFrac) {
        self.entries[r][c] = v;
    }

    pub fn entries(&self) -> &[Vec<SuperFrac>] {
        &self.entries
    }

    pub fn row(&self, r: usize) -> &[SuperFrac] {
        &self.entries[r]
    }

    pub fn column(&self, c: usize) -> Vec<SuperFrac> {
        self.entries.iter().map(|r| r[c].clone()).collect()
    }

    /// Entry parity equals row parity plus column parity everywhere.
    pub fn is_homogeneous(&self) -> bool {
        self.entries.iter().enumerate().all(|(r, row)| {
            row.iter().enumerate().all(|(c, e)| e.is_homogeneous(self.row_parities[r] + self.col_parities[c]))
        })
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> SuperMatrix {
        SuperMatrix {
            ctx: self.ctx.clone(),
            row_parities: rows.iter().map(|&r| self.row_parities[r]).collect(),
            col_parities: cols.iter().map(|&c| self.col_parities[c]).collect(),
            entries: rows.iter().map(|&r| cols.iter().map(|&c| self.entries[r][c].clone()).collect()).collect(),
        }
    }

    pub fn try_map(
        &self,
        f: impl Fn(&SuperFrac) -> Result<SuperFrac, AlgebraError>,
    ) -> Result<SuperMatrix, AlgebraError> {
        let entries = self
            .entries
            .iter()
            .map(|r| r.iter().map(&f).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SuperMatrix { entries, ..self.clone() })
    }

    pub fn checked_mul(&self, other: &SuperMatrix) -> Result<SuperMatrix, AlgebraError> {
        if !same_ctx(&self.ctx, &other.ctx) {
            return Err(AlgebraError::ContextMismatch);
        }
        if self.cols() != other.rows() {
            return Err(AlgebraError::Shape);
        }
        let mut out = SuperMatrix::zeros(&self.ctx, self.row_parities.clone(), other.col_parities.clone());
        for i in 0..self.rows() {
            for j in 0..other.cols() {
                let mut acc = SuperFrac::zero(&self.ctx);
                for k in 0..self.cols() {
                    let a = &self.entries[i][k];
                    let b = &other.entries[k][j];
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = acc.checked_add(&a.checked_mul(b)?)?;
                }
                out.entries[i][j] = acc;
            }
        }
        Ok(out)
    }

    pub fn is_identity(&self) -> bool {
        self.rows() == self.cols()
            && self
                .entries
                .iter()
                .enumerate()
                .all(|(r, row)| row.iter().enumerate().all(|(c, e)| if r == c { e.is_one() } else { e.is_zero() }))
    }

    /// Determinant over the commutative even subring (cofactor expansion).
    pub fn det_even(&self) -> Result<SuperFrac, AlgebraError> {
        if self.rows() != self.cols() {
            return Err(AlgebraError::NotSquare);
        }
        if self.entries.iter().flatten().any(|e| !e.is_homogeneous(Parity::Even)) {
            return Err(AlgebraError::OddEntry);
        }
        let idx: Vec<usize> = (0..self.cols()).collect();
        self.cofactor_det(0, &idx)
    }

    fn cofactor_det(&self, row: usize, cols: &[usize]) -> Result<SuperFrac, AlgebraError> {
        if cols.is_empty() {
            return Ok(SuperFrac::one(&self.ctx));
        }
        let mut acc = SuperFrac::zero(&self.ctx);
        for (k, &c) in cols.iter().enumerate() {
            let e = &self.entries[row][c];
            if e.is_zero() {
                continue;
            }
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let minor = self.cofactor_det(row + 1, &rest)?;
            let term = e.checked_mul(&minor)?;
            acc = if k % 2 == 0 { acc.checked_add(&term)? } else { acc.checked_sub(&term)? };
        }
        Ok(acc)
    }

    /// Two-sided inverse by Gauss-Jordan elimination with even pivots.
    pub fn invert(&self) -> Result<SuperMatrix, AlgebraError> {
        let n = self.rows();
        if n != self.cols() {
            return Err(AlgebraError::NotSquare);
        }
        let ctx = self.ctx.clone();
        let mut a = self.entries.clone();
        let mut inv = SuperMatrix::identity(&ctx, self.col_parities.clone()).entries;
        for col in 0..n {
            let usable = |e: &SuperFrac| e.is_homogeneous(Parity::Even) && !e.is_zero() && !e.num().body().is_zero();
            // prefer a constant pivot, then any invertible one
            let pivot = (col..n)
                .find(|&r| usable(&a[r][col]) && a[r][col].as_constant().is_some())
                .or_else(|| (col..n).find(|&r| usable(&a[r][col])))
                .ok_or(AlgebraError::SingularBody)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let p_inv = a[col][col].invert_even()?;
            for j in 0..n {
                a[col][j] = p_inv.checked_mul(&a[col][j])?;
                inv[col][j] = p_inv.checked_mul(&inv[col][j])?;
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for j in 0..n {
                    if !a[col][j].is_zero() {
                        let t = f.checked_mul(&a[col][j])?;
                        a[r][j] = a[r][j].checked_sub(&t)?;
                    }
                    if !inv[col][j].is_zero() {
                        let t = f.checked_mul(&inv[col][j])?;
                        inv[r][j] = inv[r][j].checked_sub(&t)?;
                    }
                }
            }
        }
        let out = SuperMatrix {
            ctx,
            row_parities: self.col_parities.clone(),
            col_parities: self.row_parities.clone(),
            entries: inv,
        };
        if !self.checked_mul(&out)?.is_identity() || !out.checked_mul(self)?.is_identity() {
            return Err(AlgebraError::InverseCheck);
        }
        Ok(out)
    }
}

impl PartialEq for SuperMatrix {
    fn eq(&self, other: &Self) -> bool {
        same_ctx(&self.ctx, &other.ctx)
            && self.row_parities == other.row_parities
            && self.col_parities == other.col_parities
            && self.entries == other.entries
    }
}

impl fmt::Debug for SuperMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "SuperMatrix {}x{} rows {:?} cols {:?}",
            self.rows(),
            self.cols(),
            self.row_parities,
            self.col_parities
        )?;
        for row in &self.entries {
            let cells: Vec<String> = row.iter().map(|e| e.to_string()).collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}
