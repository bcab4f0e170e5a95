//! The magic unitary `P = (P_ij)` attached to an Hadamard matrix, with
//! `(P_ij)_ab = (1/N) H_ia H_ja* H_jb H_ib*`.
//!
//! Each `P_ij` lives in `M_N(A)`, stored as an [`AlgElem`] over the amplified
//! shape (see [`NCMatrix::to_amplified`]).

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{AlgElem, AlgebraShape};
use crate::error::{check_tol, Error, Result};
use crate::hadamard::{verify_hadamard, NCMatrix};

/// A square grid of elements of some algebra, expected to be a magic unitary:
/// projections whose rows and columns sum to `1`.
#[derive(Clone, Debug, PartialEq)]
pub struct MagicUnitary {
    size: usize,
    algebra: AlgebraShape,
    entries: Vec<AlgElem>,
}

impl MagicUnitary {
    pub fn new(size: usize, algebra: AlgebraShape, entries: Vec<AlgElem>) -> Result<Self> {
        if size == 0 || entries.len() != size * size {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {size}x{size} magic unitary",
                entries.len()
            )));
        }
        for e in &entries {
            algebra.ensure_same(e.shape())?;
        }
        Ok(Self { size, algebra, entries })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Shape of the algebra the entries live in.
    pub fn algebra(&self) -> &AlgebraShape {
        &self.algebra
    }

    pub fn entries(&self) -> &[AlgElem] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &AlgElem {
        assert!(i < self.size && j < self.size, "index ({i},{j}) out of range");
        &self.entries[i * self.size + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: AlgElem) -> Result<()> {
        self.algebra.ensure_same(value.shape())?;
        assert!(i < self.size && j < self.size, "index ({i},{j}) out of range");
        self.entries[i * self.size + j] = value;
        Ok(())
    }
}

/// Builds `P` from `H`, rejecting inputs that fail the Hadamard axioms at `tol`.
pub fn build_magic(h: &NCMatrix, tol: f64) -> Result<MagicUnitary> {
    let report = verify_hadamard(h, tol)?;
    if !report.passed {
        return Err(Error::NotHadamard(Box::new(report)));
    }
    build_magic_unchecked(h)
}

/// Evaluates the defining formula for any square `H`, without checking the
/// axioms. Useful for studying how defects of `H` propagate into `P`.
pub fn build_magic_unchecked(h: &NCMatrix) -> Result<MagicUnitary> {
    if !h.is_square() {
        return Err(Error::NotSquare {
            rows: h.rows(),
            cols: h.cols(),
        });
    }
    let n = h.rows();
    let inv_n = Complex64::new(1.0 / n as f64, 0.0);
    let adj = h.conjugate();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            // left[a] = H_ia H_ja*, right[b] = H_jb H_ib* = left[b]*
            let left: Vec<AlgElem> = (0..n).map(|a| h.get(i, a) * adj.get(j, a)).collect();
            let grid = NCMatrix::from_fn(h.shape(), n, n, |a, b| {
                let right = h.get(j, b) * adj.get(i, b);
                (&left[a] * &right).scale(inv_n)
            })?;
            entries.push(grid.to_amplified()?);
        }
    }
    let algebra = h.shape().amplify(n);
    MagicUnitary::new(n, algebra, entries)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MagicReport {
    pub size: usize,
    pub tolerance: f64,
    /// `max ‖P_ij − P_ij*‖`.
    pub residual_self_adjoint: f64,
    /// `max ‖P_ij² − P_ij‖`.
    pub residual_idempotent: f64,
    /// `max_i ‖Σⱼ P_ij − 1‖`.
    pub residual_row_sums: f64,
    /// `max_j ‖Σᵢ P_ij − 1‖`.
    pub residual_col_sums: f64,
    pub passed: bool,
}

impl MagicReport {
    pub fn max_residual(&self) -> f64 {
        self.residual_self_adjoint
            .max(self.residual_idempotent)
            .max(self.residual_row_sums)
            .max(self.residual_col_sums)
    }
}

pub fn verify_magic(p: &MagicUnitary, tol: f64) -> Result<MagicReport> {
    check_tol(tol)?;
    let n = p.size();
    let one = AlgElem::identity(p.algebra());
    let mut sa: f64 = 0.0;
    let mut idem: f64 = 0.0;
    for e in p.entries() {
        sa = sa.max((e - &e.adjoint()).norm());
        idem = idem.max((&(e * e) - e).norm());
    }
    let mut rows: f64 = 0.0;
    let mut cols: f64 = 0.0;
    for i in 0..n {
        let mut r = AlgElem::zero(p.algebra());
        let mut c = AlgElem::zero(p.algebra());
        for j in 0..n {
            r = &r + p.get(i, j);
            c = &c + p.get(j, i);
        }
        rows = rows.max((&r - &one).norm());
        cols = cols.max((&c - &one).norm());
    }
    let mut report = MagicReport {
        size: n,
        tolerance: tol,
        residual_self_adjoint: sa,
        residual_idempotent: idem,
        residual_row_sums: rows,
        residual_col_sums: cols,
        passed: false,
    };
    report.passed = report.max_residual() <= tol;
    Ok(report)
}
