//! Elements of finite-dimensional C*-algebras `A = ⊕ₓ M_{Kₓ}(ℂ)`.
//!
//! An algebra is described by its [`AlgebraShape`], the ordered list of fiber
//! dimensions `(K₁, …, K_m)`. A commutative algebra `C(X)` over a finite set
//! `X` is the shape with every fiber of dimension one, and a random matrix
//! algebra `M_K(C(X))` is the shape with every fiber of dimension `K`.
//!
//! Elements ([`AlgElem`]) are stored fiber by fiber as dense complex blocks.
//! All operations act blockwise. Norms are operator norms (largest singular
//! value), which is the C*-norm of a matrix algebra; the norm of a direct sum
//! is the maximum over fibers.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_tol, Error, Result};

pub type Block = DMatrix<Complex64>;

/// Fiber dimensions of `A = ⊕ₓ M_{Kₓ}(ℂ)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AlgebraShape(Arc<[usize]>);

impl AlgebraShape {
    pub fn new(fibers: Vec<usize>) -> Result<Self> {
        if fibers.is_empty() {
            return Err(Error::InvalidShape("at least one fiber is required".into()));
        }
        if let Some(pos) = fibers.iter().position(|&k| k == 0) {
            return Err(Error::InvalidShape(format!("fiber {pos} has dimension 0")));
        }
        Ok(Self(fibers.into()))
    }

    /// The algebra `ℂ`.
    pub fn scalar() -> Self {
        Self(Arc::from([1usize]))
    }

    /// `M_k(ℂ)`.
    pub fn matrix(k: usize) -> Result<Self> {
        Self::new(vec![k])
    }

    /// Parses the comma-separated syntax used on the command line, e.g. `"1,1,2"`.
    pub fn parse(spec: &str) -> Result<Self> {
        let fibers = spec
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidShape(format!("cannot parse '{tok}' in '{spec}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(fibers)
    }

    pub fn fibers(&self) -> &[usize] {
        &self.0
    }

    pub fn num_fibers(&self) -> usize {
        self.0.len()
    }

    pub fn total_dim(&self) -> usize {
        self.0.iter().sum()
    }

    /// True when every fiber is one-dimensional, i.e. `A = C(X)`.
    pub fn is_commutative(&self) -> bool {
        self.0.iter().all(|&k| k == 1)
    }

    /// Shape of `M_n(A)`, identified with `⊕ₓ M_{n·Kₓ}(ℂ)`.
    pub fn amplify(&self, n: usize) -> Self {
        assert!(n > 0, "amplification factor must be positive");
        Self(self.0.iter().map(|&k| k * n).collect())
    }

    pub(crate) fn ensure_same(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                left: self.clone(),
                right: other.clone(),
            })
        }
    }
}

impl fmt::Display for AlgebraShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for AlgebraShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgebraShape{self}")
    }
}

impl Serialize for AlgebraShape {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AlgebraShape {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let fibers = Vec::<usize>::deserialize(deserializer)?;
        AlgebraShape::new(fibers).map_err(serde::de::Error::custom)
    }
}

/// One element of `A`, stored as one dense block per fiber.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgElem {
    shape: AlgebraShape,
    blocks: Vec<Block>,
}

impl AlgElem {
    pub fn from_blocks(shape: AlgebraShape, blocks: Vec<Block>) -> Result<Self> {
        if blocks.len() != shape.num_fibers() {
            return Err(Error::DimensionMismatch(format!(
                "{} blocks for shape {shape}",
                blocks.len()
            )));
        }
        for (x, (b, &k)) in blocks.iter().zip(shape.fibers()).enumerate() {
            if b.nrows() != k || b.ncols() != k {
                return Err(Error::DimensionMismatch(format!(
                    "fiber {x} block is {}x{}, expected {k}x{k}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(Self { shape, blocks })
    }

    pub(crate) fn from_blocks_unchecked(shape: AlgebraShape, blocks: Vec<Block>) -> Self {
        debug_assert_eq!(blocks.len(), shape.num_fibers());
        Self { shape, blocks }
    }

    /// Convenience constructor for a single-fiber element `M_k(ℂ)` from
    /// row-major entries.
    pub fn from_matrix(k: usize, row_major: &[Complex64]) -> Result<Self> {
        if row_major.len() != k * k {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {k}x{k} block",
                row_major.len()
            )));
        }
        Self::from_blocks(AlgebraShape::matrix(k)?, vec![Block::from_row_slice(k, k, row_major)])
    }

    pub fn zero(shape: &AlgebraShape) -> Self {
        let blocks = shape.fibers().iter().map(|&k| Block::zeros(k, k)).collect();
        Self::from_blocks_unchecked(shape.clone(), blocks)
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        Self::scalar(shape, Complex64::new(1.0, 0.0))
    }

    /// `λ·1`.
    pub fn scalar(shape: &AlgebraShape, value: Complex64) -> Self {
        let blocks = shape
            .fibers()
            .iter()
            .map(|&k| Block::from_diagonal_element(k, k, value))
            .collect();
        Self::from_blocks_unchecked(shape.clone(), blocks)
    }

    /// Central element taking the scalar value `values[x]` on fiber `x`.
    pub fn central(shape: &AlgebraShape, values: &[Complex64]) -> Result<Self> {
        if values.len() != shape.num_fibers() {
            return Err(Error::DimensionMismatch(format!(
                "{} fiber values for shape {shape}",
                values.len()
            )));
        }
        let blocks = shape
            .fibers()
            .iter()
            .zip(values)
            .map(|(&k, &v)| Block::from_diagonal_element(k, k, v))
            .collect();
        Ok(Self::from_blocks_unchecked(shape.clone(), blocks))
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, fiber: usize) -> &Block {
        &self.blocks[fiber]
    }

    pub fn into_blocks(self) -> Vec<Block> {
        self.blocks
    }

    /// Fiberwise product, rejecting mismatched shapes.
    pub fn mul(&self, other: &AlgElem) -> Result<AlgElem> {
        self.shape.ensure_same(&other.shape)?;
        Ok(self.zip_with(other, |a, b| a * b))
    }

    /// Fiberwise conjugate transpose.
    pub fn adjoint(&self) -> AlgElem {
        self.map(|b| b.adjoint())
    }

    pub fn scale(&self, c: Complex64) -> AlgElem {
        self.map(|b| b * c)
    }

    /// Operator norm: the largest singular value over all fibers.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(block_norm).fold(0.0, f64::max)
    }

    /// Sum of squared absolute values of all block entries.
    pub fn frobenius_sq(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum()
    }

    /// `max(‖aa* − 1‖, ‖a*a − 1‖)` over fibers.
    pub fn unitarity_residual(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let id = Block::identity(b.nrows(), b.ncols());
                let left = block_norm(&(b * b.adjoint() - &id));
                let right = block_norm(&(b.adjoint() * b - &id));
                left.max(right)
            })
            .fold(0.0, f64::max)
    }

    /// Whether the element is unitary within `tol`, together with the residual.
    pub fn is_unitary(&self, tol: f64) -> Result<(bool, f64)> {
        check_tol(tol)?;
        let r = self.unitarity_residual();
        Ok((r <= tol, r))
    }

    /// Distance of each block to the scalar multiple of the identity given by
    /// its normalized trace, maximized over fibers.
    pub fn centrality_residual(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let k = b.nrows();
                let lambda = b.trace() / k as f64;
                block_norm(&(b - Block::from_diagonal_element(k, k, lambda)))
            })
            .fold(0.0, f64::max)
    }

    pub fn is_central(&self, tol: f64) -> Result<bool> {
        check_tol(tol)?;
        Ok(self.centrality_residual() <= tol)
    }

    /// Uniform average over fibers of the normalized fiber traces.
    pub fn normalized_trace(&self) -> Complex64 {
        let m = self.blocks.len() as f64;
        self.blocks
            .iter()
            .map(|b| b.trace() / b.nrows() as f64)
            .sum::<Complex64>()
            / m
    }

    /// Haar-distributed unitary, independently on each fiber, drawn from a
    /// private generator seeded with `seed`.
    pub fn random_unitary(shape: &AlgebraShape, seed: u64) -> AlgElem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_unitary_with(shape, &mut rng)
    }

    pub fn random_unitary_with<R: Rng + ?Sized>(shape: &AlgebraShape, rng: &mut R) -> AlgElem {
        let blocks = shape
            .fibers()
            .iter()
            .map(|&k| haar_unitary(k, rng))
            .collect();
        Self::from_blocks_unchecked(shape.clone(), blocks)
    }

    /// Random element with independent standard complex Gaussian entries.
    pub fn random_gaussian_with<R: Rng + ?Sized>(shape: &AlgebraShape, rng: &mut R) -> AlgElem {
        let blocks = shape
            .fibers()
            .iter()
            .map(|&k| gaussian_block(k, rng))
            .collect();
        Self::from_blocks_unchecked(shape.clone(), blocks)
    }

    pub(crate) fn map(&self, f: impl Fn(&Block) -> Block) -> AlgElem {
        Self::from_blocks_unchecked(self.shape.clone(), self.blocks.iter().map(f).collect())
    }

    pub(crate) fn zip_with(&self, other: &AlgElem, f: impl Fn(&Block, &Block) -> Block) -> AlgElem {
        debug_assert_eq!(self.shape, other.shape);
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| f(a, b))
            .collect();
        Self::from_blocks_unchecked(self.shape.clone(), blocks)
    }
}

/// Operator norm of `ab − ba`, maximized over fibers.
pub fn commutator_residual(a: &AlgElem, b: &AlgElem) -> Result<f64> {
    a.shape.ensure_same(&b.shape)?;
    Ok(commutator_norm(a, b))
}

pub(crate) fn commutator_norm(a: &AlgElem, b: &AlgElem) -> f64 {
    a.blocks
        .iter()
        .zip(&b.blocks)
        .map(|(x, y)| {
            if x.nrows() == 1 {
                0.0
            } else {
                block_norm(&(x * y - y * x))
            }
        })
        .fold(0.0, f64::max)
}

/// Largest singular value of a block.
pub fn block_norm(b: &Block) -> f64 {
    match b.nrows() {
        0 => 0.0,
        1 => b[(0, 0)].norm(),
        _ => b.clone().singular_values().max(),
    }
}

fn gaussian_block<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Block {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    Block::from_fn(k, k, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * scale, im * scale)
    })
}

/// QR of a complex Ginibre matrix, with the phases of `R`'s diagonal moved
/// into `Q` so that the factorization is unique and `Q` is Haar distributed.
fn haar_unitary<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Block {
    let z = gaussian_block(k, rng);
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..k {
        let d = r[(j, j)];
        let n = d.norm();
        let phase = if n > 0.0 { d / n } else { Complex64::new(1.0, 0.0) };
        for i in 0..k {
            q[(i, j)] *= phase;
        }
    }
    q
}

impl<'a> Mul<&'a AlgElem> for &'a AlgElem {
    type Output = AlgElem;

    /// Panics on shape mismatch; use [`AlgElem::mul`] for a checked product.
    fn mul(self, rhs: &'a AlgElem) -> AlgElem {
        assert_eq!(self.shape, rhs.shape, "shape mismatch in product");
        self.zip_with(rhs, |a, b| a * b)
    }
}

impl<'a> Add<&'a AlgElem> for &'a AlgElem {
    type Output = AlgElem;

    fn add(self, rhs: &'a AlgElem) -> AlgElem {
        assert_eq!(self.shape, rhs.shape, "shape mismatch in sum");
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<'a> Sub<&'a AlgElem> for &'a AlgElem {
    type Output = AlgElem;

    fn sub(self, rhs: &'a AlgElem) -> AlgElem {
        assert_eq!(self.shape, rhs.shape, "shape mismatch in difference");
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &AlgElem {
    type Output = AlgElem;

    fn neg(self) -> AlgElem {
        self.map(|b| -b)
    }
}
