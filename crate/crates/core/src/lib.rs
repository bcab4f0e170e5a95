//! Hadamard matrices with entries in finite-dimensional C*-algebras.
//!
//! The crate covers the algebra of `A = ⊕ₓ M_{Kₓ}(ℂ)`, the Hadamard axioms
//! and their equivalence operations, (deformed) tensor products, the
//! associated magic unitary, numerical estimates of the character moments of
//! the associated quantum permutation group, the factorization identities
//! for deformed products, and classification checks at small sizes.

pub mod algebra;
pub mod classify;
pub mod error;
pub mod hadamard;
pub mod invariants;
pub mod io;
pub mod json;
pub mod magic;
pub mod search;
pub mod wreath;

pub use algebra::{commutator_residual, AlgElem, AlgebraShape};
pub use error::{Error, Result};
pub use hadamard::{NCMatrix, VerificationReport};
pub use magic::MagicUnitary;
