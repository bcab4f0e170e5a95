//! Square matrices over `A` and the Hadamard axioms.
//!
//! A matrix `H ∈ M_N(A)` is Hadamard when its entries are unitary, entries on
//! a common row or column commute, and rows and columns are pairwise
//! orthogonal in both the `Σ aᵢbᵢ*` and `Σ aᵢ*bᵢ` senses.
//!
//! Product matrices (`tensor`, `dita_deform`) flatten the double index
//! `(i, a)` to `i·M + a`, outer index first.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{commutator_norm, AlgElem, AlgebraShape, Block};
use crate::error::{check_tol, Error, Result};

/// An `R×C` grid of algebra elements sharing one shape, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct NCMatrix {
    shape: AlgebraShape,
    rows: usize,
    cols: usize,
    entries: Vec<AlgElem>,
}

impl NCMatrix {
    pub fn new(shape: AlgebraShape, rows: usize, cols: usize, entries: Vec<AlgElem>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!("empty {rows}x{cols} matrix")));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        for e in &entries {
            shape.ensure_same(e.shape())?;
        }
        Ok(Self {
            shape,
            rows,
            cols,
            entries,
        })
    }

    pub fn from_fn(
        shape: &AlgebraShape,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> AlgElem,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(shape.clone(), rows, cols, entries)
    }

    /// Matrix whose entries are the given row-major scalars times the identity.
    pub fn from_scalars(shape: &AlgebraShape, rows: usize, cols: usize, values: &[Complex64]) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        Self::from_fn(shape, rows, cols, |i, j| AlgElem::scalar(shape, values[i * cols + j]))
    }

    /// The `N×N` matrix with every entry equal to `1`.
    pub fn ones(shape: &AlgebraShape, rows: usize, cols: usize) -> Result<Self> {
        Self::from_fn(shape, rows, cols, |_, _| AlgElem::identity(shape))
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[AlgElem] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &AlgElem {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: AlgElem) -> Result<()> {
        self.shape.ensure_same(value.shape())?;
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        self.entries[i * self.cols + j] = value;
        Ok(())
    }

    pub(crate) fn size(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// Largest entrywise operator-norm difference. Panics unless both
    /// matrices have the same dimensions and shape.
    pub fn max_entry_distance(&self, other: &NCMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `H̄ = (H_ij*)`.
    pub fn conjugate(&self) -> NCMatrix {
        self.map_entries(AlgElem::adjoint)
    }

    /// `Hᵗ = (H_ji)`.
    pub fn transpose(&self) -> NCMatrix {
        let entries = (0..self.cols)
            .flat_map(|j| (0..self.rows).map(move |i| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        NCMatrix {
            shape: self.shape.clone(),
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    /// `H* = (H_ji*)`.
    pub fn adjoint(&self) -> NCMatrix {
        self.transpose().conjugate()
    }

    pub fn map_entries(&self, f: impl Fn(&AlgElem) -> AlgElem) -> NCMatrix {
        NCMatrix {
            shape: self.shape.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    /// The square matrix as an element of `M_N(A) ≅ ⊕ₓ M_{N·Kₓ}(ℂ)`; entry
    /// `(i, j)` of fiber `x` occupies rows `i·Kₓ..` and columns `j·Kₓ..`.
    pub fn to_amplified(&self) -> Result<AlgElem> {
        let n = self.size()?;
        let shape = self.shape.amplify(n);
        let blocks = self
            .shape
            .fibers()
            .iter()
            .enumerate()
            .map(|(x, &k)| {
                let mut big = Block::zeros(n * k, n * k);
                for i in 0..n {
                    for j in 0..n {
                        big.view_mut((i * k, j * k), (k, k))
                            .copy_from(self.get(i, j).block(x));
                    }
                }
                big
            })
            .collect();
        Ok(AlgElem::from_blocks_unchecked(shape, blocks))
    }

    /// Inverse of [`NCMatrix::to_amplified`].
    pub fn from_amplified(elem: &AlgElem, n: usize, base: &AlgebraShape) -> Result<NCMatrix> {
        if n == 0 || elem.shape() != &base.amplify(n) {
            return Err(Error::DimensionMismatch(format!(
                "element of shape {} is not in M_{n}({base})",
                elem.shape()
            )));
        }
        NCMatrix::from_fn(base, n, n, |i, j| {
            let blocks = base
                .fibers()
                .iter()
                .enumerate()
                .map(|(x, &k)| elem.block(x).view((i * k, j * k), (k, k)).clone_owned())
                .collect();
            AlgElem::from_blocks_unchecked(base.clone(), blocks)
        })
    }
}

/// Residuals of the three Hadamard axioms, each an operator norm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub size: usize,
    pub tolerance: f64,
    pub residual_unitarity: f64,
    pub residual_row_commutation: f64,
    pub residual_col_commutation: f64,
    pub residual_row_orth: f64,
    pub residual_col_orth: f64,
    /// Entry `(i, j)` with the worst unitarity residual.
    pub worst_unitarity: [usize; 2],
    /// Row `i` and columns `j, k` of the worst same-row commutator.
    pub worst_row_commutation: [usize; 3],
    /// Column `j` and rows `i, k` of the worst same-column commutator.
    pub worst_col_commutation: [usize; 3],
    /// Pair of rows with the worst orthogonality defect.
    pub worst_row_orth: [usize; 2],
    /// Pair of columns with the worst orthogonality defect.
    pub worst_col_orth: [usize; 2],
    pub passed: bool,
}

impl VerificationReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.residual_unitarity,
            self.residual_row_commutation,
            self.residual_col_commutation,
            self.residual_row_orth,
            self.residual_col_orth,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

struct Worst<const D: usize> {
    value: f64,
    at: [usize; D],
}

impl<const D: usize> Worst<D> {
    fn new() -> Self {
        Self { value: 0.0, at: [0; D] }
    }

    fn offer(&mut self, value: f64, at: [usize; D]) {
        if value > self.value || value.is_nan() {
            self.value = value;
            self.at = at;
        }
    }
}

/// Checks the Hadamard axioms. Orthogonality residuals are
/// `‖(Σⱼ H_ij H_kj* − N δ_ik)/N‖` together with the three companion sums.
pub fn verify_hadamard(h: &NCMatrix, tol: f64) -> Result<VerificationReport> {
    check_tol(tol)?;
    let n = h.size()?;
    let nf = n as f64;
    let shape = h.shape();
    let one = AlgElem::identity(shape);

    let mut unit = Worst::<2>::new();
    for i in 0..n {
        for j in 0..n {
            unit.offer(h.get(i, j).unitarity_residual(), [i, j]);
        }
    }

    let mut row_comm = Worst::<3>::new();
    let mut col_comm = Worst::<3>::new();
    for p in 0..n {
        for q in 0..n {
            for r in q + 1..n {
                row_comm.offer(commutator_norm(h.get(p, q), h.get(p, r)), [p, q, r]);
                col_comm.offer(commutator_norm(h.get(q, p), h.get(r, p)), [p, q, r]);
            }
        }
    }

    let orth_defect = |sum: AlgElem, diag: bool| -> f64 {
        let target = if diag { one.scale(Complex64::new(nf, 0.0)) } else { AlgElem::zero(shape) };
        (&sum - &target).norm() / nf
    };
    let mut row_orth = Worst::<2>::new();
    let mut col_orth = Worst::<2>::new();
    for i in 0..n {
        for k in i..n {
            let mut rows_a = AlgElem::zero(shape);
            let mut rows_b = AlgElem::zero(shape);
            let mut cols_a = AlgElem::zero(shape);
            let mut cols_b = AlgElem::zero(shape);
            for j in 0..n {
                rows_a = &rows_a + &(h.get(i, j) * &h.get(k, j).adjoint());
                rows_b = &rows_b + &(&h.get(i, j).adjoint() * h.get(k, j));
                cols_a = &cols_a + &(h.get(j, i) * &h.get(j, k).adjoint());
                cols_b = &cols_b + &(&h.get(j, i).adjoint() * h.get(j, k));
            }
            let diag = i == k;
            row_orth.offer(orth_defect(rows_a, diag).max(orth_defect(rows_b, diag)), [i, k]);
            col_orth.offer(orth_defect(cols_a, diag).max(orth_defect(cols_b, diag)), [i, k]);
        }
    }

    let mut report = VerificationReport {
        size: n,
        tolerance: tol,
        residual_unitarity: unit.value,
        residual_row_commutation: row_comm.value,
        residual_col_commutation: col_comm.value,
        residual_row_orth: row_orth.value,
        residual_col_orth: col_orth.value,
        worst_unitarity: unit.at,
        worst_row_commutation: row_comm.at,
        worst_col_commutation: col_comm.at,
        worst_row_orth: row_orth.at,
        worst_col_orth: col_orth.at,
        passed: false,
    };
    report.passed = report.max_residual() <= tol;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BiunitaryReport {
    pub tolerance: f64,
    /// `‖HH* − N·1‖ / N`.
    pub residual_h_hstar: f64,
    /// `‖HᵗH̄ − N·1‖ / N`.
    pub residual_ht_hbar: f64,
    pub biunitary: bool,
}

/// Whether `H/√N` is biunitary: `HH* = HᵗH̄ = N·1` in `M_N(A)` within `N·tol`.
pub fn is_biunitary(h: &NCMatrix, tol: f64) -> Result<BiunitaryReport> {
    check_tol(tol)?;
    let n = h.size()?;
    let nf = n as f64;
    let amp = h.to_amplified()?;
    let target = AlgElem::scalar(amp.shape(), Complex64::new(nf, 0.0));
    let hh = &amp * &amp.adjoint();
    let tb = &h.transpose().to_amplified()? * &h.conjugate().to_amplified()?;
    let residual_h_hstar = (&hh - &target).norm() / nf;
    let residual_ht_hbar = (&tb - &target).norm() / nf;
    Ok(BiunitaryReport {
        tolerance: tol,
        residual_h_hstar,
        residual_ht_hbar,
        biunitary: residual_h_hstar <= tol && residual_ht_hbar <= tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassicalReport {
    pub tolerance: f64,
    /// Largest `‖[x, y]‖` with `x` an entry and `y` an entry or the adjoint of one.
    pub residual: f64,
    /// Row-major positions of the worst pair; `adjoint` tells whether the
    /// second element was taken with its adjoint.
    pub worst_pair: [usize; 2],
    pub adjoint: bool,
    pub classical: bool,
}

/// Whether the entries generate a commutative C*-algebra.
pub fn is_classical(h: &NCMatrix, tol: f64) -> Result<ClassicalReport> {
    check_tol(tol)?;
    let entries = h.entries();
    let adjoints: Vec<AlgElem> = entries.iter().map(AlgElem::adjoint).collect();
    let mut worst = (0.0, [0, 0], false);
    if !h.shape().is_commutative() {
        for p in 0..entries.len() {
            for q in p..entries.len() {
                let plain = if p == q { 0.0 } else { commutator_norm(&entries[p], &entries[q]) };
                let with_adj = commutator_norm(&entries[p], &adjoints[q]);
                if plain > worst.0 {
                    worst = (plain, [p, q], false);
                }
                if with_adj > worst.0 {
                    worst = (with_adj, [p, q], true);
                }
            }
        }
    }
    Ok(ClassicalReport {
        tolerance: tol,
        residual: worst.0,
        worst_pair: worst.1,
        adjoint: worst.2,
        classical: worst.0 <= tol,
    })
}

/// The operations generating Hadamard equivalence.
#[derive(Clone, Debug)]
pub enum EquivalenceOp {
    /// New row `r` is old row `perm[r]`.
    PermuteRows(Vec<usize>),
    /// New column `c` is old column `perm[c]`.
    PermuteCols(Vec<usize>),
    /// Left-multiplies every entry of the row by a central unitary.
    ScaleRow { row: usize, unit: AlgElem },
    /// Left-multiplies every entry of the column by a central unitary.
    ScaleCol { col: usize, unit: AlgElem },
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::InvalidArgument(format!(
            "permutation of length {} for dimension {n}",
            perm.len()
        )));
    }
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation")));
        }
    }
    Ok(())
}

fn check_scaling_unit(h: &NCMatrix, unit: &AlgElem, tol: f64) -> Result<()> {
    h.shape().ensure_same(unit.shape())?;
    let ur = unit.unitarity_residual();
    if ur > tol {
        return Err(Error::NotUnitary {
            what: "scaling element".into(),
            residual: ur,
        });
    }
    let cr = unit.centrality_residual();
    if cr > tol {
        return Err(Error::NotCentral {
            what: "scaling element".into(),
            residual: cr,
        });
    }
    Ok(())
}

/// Applies one equivalence operation. Scaling elements must be central
/// unitaries within `tol`.
pub fn apply_equivalence(h: &NCMatrix, op: &EquivalenceOp, tol: f64) -> Result<NCMatrix> {
    check_tol(tol)?;
    let (rows, cols) = (h.rows(), h.cols());
    match op {
        EquivalenceOp::PermuteRows(perm) => {
            check_permutation(perm, rows)?;
            NCMatrix::from_fn(h.shape(), rows, cols, |i, j| h.get(perm[i], j).clone())
        }
        EquivalenceOp::PermuteCols(perm) => {
            check_permutation(perm, cols)?;
            NCMatrix::from_fn(h.shape(), rows, cols, |i, j| h.get(i, perm[j]).clone())
        }
        EquivalenceOp::ScaleRow { row, unit } => {
            if *row >= rows {
                return Err(Error::InvalidArgument(format!("row {row} out of range")));
            }
            check_scaling_unit(h, unit, tol)?;
            NCMatrix::from_fn(h.shape(), rows, cols, |i, j| {
                if i == *row {
                    unit * h.get(i, j)
                } else {
                    h.get(i, j).clone()
                }
            })
        }
        EquivalenceOp::ScaleCol { col, unit } => {
            if *col >= cols {
                return Err(Error::InvalidArgument(format!("column {col} out of range")));
            }
            check_scaling_unit(h, unit, tol)?;
            NCMatrix::from_fn(h.shape(), rows, cols, |i, j| {
                if j == *col {
                    unit * h.get(i, j)
                } else {
                    h.get(i, j).clone()
                }
            })
        }
    }
}

/// Default tolerance used for preconditions of operations that take none.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Normalizes the first row and column to `1`. Only defined over commutative
/// algebras, where every unitary is central.
pub fn dephase(h: &NCMatrix) -> Result<NCMatrix> {
    let n = h.size()?;
    if !h.shape().is_commutative() {
        return Err(Error::NonCommutativeShape(h.shape().clone()));
    }
    let mut out = h.clone();
    for j in 0..n {
        let unit = out.get(0, j).adjoint();
        out = apply_equivalence(&out, &EquivalenceOp::ScaleCol { col: j, unit }, DEFAULT_TOLERANCE)?;
    }
    for i in 1..n {
        let unit = out.get(i, 0).adjoint();
        out = apply_equivalence(&out, &EquivalenceOp::ScaleRow { row: i, unit }, DEFAULT_TOLERANCE)?;
    }
    Ok(out)
}

/// The Fourier matrix `F_N = (w^{ij})`, `w = e^{2πi/N}`, 0-based indices,
/// with scalar entries embedded in `A`.
pub fn fourier(n: usize, shape: &AlgebraShape) -> Result<NCMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("Fourier matrix size must be at least 1".into()));
    }
    NCMatrix::from_fn(shape, n, n, |i, j| {
        // reduce the exponent first so large products keep full accuracy
        let e = (i * j) % n;
        AlgElem::scalar(shape, Complex64::from_polar(1.0, 2.0 * PI * e as f64 / n as f64))
    })
}

fn hypothesis(name: &str, residual: f64, location: String) -> Error {
    Error::HypothesisFailed {
        hypothesis: name.to_string(),
        residual,
        location,
    }
}

fn require_hadamard(name: &str, m: &NCMatrix, tol: f64) -> Result<()> {
    let report = verify_hadamard(m, tol)?;
    if report.passed {
        Ok(())
    } else {
        Err(hypothesis(
            &format!("{name} is Hadamard"),
            report.max_residual(),
            format!("{name}"),
        ))
    }
}

/// Largest commutator between an entry of `a` and an entry of `b`.
fn cross_commutation(a: &NCMatrix, b: &NCMatrix) -> (f64, usize, usize) {
    let mut worst = (0.0, 0, 0);
    if a.shape().is_commutative() {
        return worst;
    }
    for (p, x) in a.entries().iter().enumerate() {
        for (q, y) in b.entries().iter().enumerate() {
            let r = commutator_norm(x, y);
            if r > worst.0 {
                worst = (r, p, q);
            }
        }
    }
    worst
}

fn require_commuting(name: &str, a: &NCMatrix, an: &str, b: &NCMatrix, bn: &str, tol: f64) -> Result<()> {
    let (r, p, q) = cross_commutation(a, b);
    if r > tol {
        Err(hypothesis(
            name,
            r,
            format!(
                "{an}[{},{}] vs {bn}[{},{}]",
                p / a.cols(),
                p % a.cols(),
                q / b.cols(),
                q % b.cols()
            ),
        ))
    } else {
        Ok(())
    }
}

/// `(H⊗K)_{ia,jb} = H_ij K_ab`. Requires both factors Hadamard and their
/// entries to commute with each other.
pub fn tensor(h: &NCMatrix, k: &NCMatrix, tol: f64) -> Result<NCMatrix> {
    check_tol(tol)?;
    let n = h.size()?;
    let m = k.size()?;
    h.shape().ensure_same(k.shape())?;
    require_hadamard("H", h, tol)?;
    require_hadamard("K", k, tol)?;
    require_commuting("entries of H commute with entries of K", h, "H", k, "K", tol)?;
    NCMatrix::from_fn(h.shape(), n * m, n * m, |r, c| {
        let (i, a) = (r / m, r % m);
        let (j, b) = (c / m, c % m);
        h.get(i, j) * k.get(a, b)
    })
}

/// Hypotheses of the deformed tensor product, in the order they are checked.
pub const DITA_HYPOTHESES: [&str; 7] = [
    "H is Hadamard",
    "K is Hadamard",
    "Q entries are unitary",
    "Q entries commute along rows",
    "Q entries commute along columns",
    "entries of H, K and Q pairwise commute",
    "Q is N x M",
];

/// Deformed tensor product `(H ⊗_Q K)_{ia,jb} = Q_ib H_ij K_ab` with
/// `Q ∈ M_{N×M}(A)`.
pub fn dita_deform(h: &NCMatrix, k: &NCMatrix, q: &NCMatrix, tol: f64) -> Result<NCMatrix> {
    check_tol(tol)?;
    let n = h.size()?;
    let m = k.size()?;
    h.shape().ensure_same(k.shape())?;
    h.shape().ensure_same(q.shape())?;
    if q.rows() != n || q.cols() != m {
        return Err(hypothesis(
            DITA_HYPOTHESES[6],
            f64::INFINITY,
            format!("Q is {}x{}, expected {n}x{m}", q.rows(), q.cols()),
        ));
    }
    require_hadamard("H", h, tol)?;
    require_hadamard("K", k, tol)?;

    let mut unit = (0.0, 0);
    for (p, e) in q.entries().iter().enumerate() {
        let r = e.unitarity_residual();
        if r > unit.0 {
            unit = (r, p);
        }
    }
    if unit.0 > tol {
        return Err(hypothesis(
            DITA_HYPOTHESES[2],
            unit.0,
            format!("Q[{},{}]", unit.1 / m, unit.1 % m),
        ));
    }

    let mut row = (0.0, [0; 3]);
    let mut col = (0.0, [0; 3]);
    for i in 0..n {
        for b in 0..m {
            for c in b + 1..m {
                let r = commutator_norm(q.get(i, b), q.get(i, c));
                if r > row.0 {
                    row = (r, [i, b, c]);
                }
            }
        }
    }
    for b in 0..m {
        for i in 0..n {
            for j in i + 1..n {
                let r = commutator_norm(q.get(i, b), q.get(j, b));
                if r > col.0 {
                    col = (r, [b, i, j]);
                }
            }
        }
    }
    if row.0 > tol {
        let [i, b, c] = row.1;
        return Err(hypothesis(DITA_HYPOTHESES[3], row.0, format!("Q[{i},{b}] vs Q[{i},{c}]")));
    }
    if col.0 > tol {
        let [b, i, j] = col.1;
        return Err(hypothesis(DITA_HYPOTHESES[4], col.0, format!("Q[{i},{b}] vs Q[{j},{b}]")));
    }
    let name = DITA_HYPOTHESES[5];
    require_commuting(name, h, "H", k, "K", tol)?;
    require_commuting(name, h, "H", q, "Q", tol)?;
    require_commuting(name, k, "K", q, "Q", tol)?;

    NCMatrix::from_fn(h.shape(), n * m, n * m, |r, c| {
        let (i, a) = (r / m, r % m);
        let (j, b) = (c / m, c % m);
        &(q.get(i, b) * h.get(i, j)) * k.get(a, b)
    })
}

/// `H̄`, `Hᵗ` and `H*`, which are Hadamard whenever `H` is.
#[derive(Clone, Debug, PartialEq)]
pub struct Relatives {
    pub conjugate: NCMatrix,
    pub transpose: NCMatrix,
    pub adjoint: NCMatrix,
}

pub fn relatives(h: &NCMatrix) -> Relatives {
    Relatives {
        conjugate: h.conjugate(),
        transpose: h.transpose(),
        adjoint: h.adjoint(),
    }
}

/// The 4×4 matrix `[[x,y,x,y],[x,−y,x,−y],[z,t,−z,−t],[z,−t,−z,t]]`, which
/// is Hadamard for unitaries with `[x,y] = [x,z] = [y,t] = [z,t] = 0`.
pub fn two_by_two_deformed(x: &AlgElem, y: &AlgElem, z: &AlgElem, t: &AlgElem) -> Result<NCMatrix> {
    let shape = x.shape().clone();
    for e in [y, z, t] {
        shape.ensure_same(e.shape())?;
    }
    let (my, mz, mt) = (-y, -z, -t);
    let rows = [
        [x, y, x, y],
        [x, &my, x, &my],
        [z, t, &mz, &mt],
        [z, &mt, &mz, t],
    ];
    let entries = rows.iter().flat_map(|r| r.iter().map(|e| (*e).clone())).collect();
    NCMatrix::new(shape, 4, 4, entries)
}
