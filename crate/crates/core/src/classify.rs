//! Checks of the small-size classification results: every 2×2 and 3×3
//! Hadamard matrix is classical, vanishing sums of three unitaries are of
//! the form `a + wa + w²a` with `1 + w + w² = 0`, and the canonical 3×3 form.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{commutator_norm, AlgElem};
use crate::error::{check_tol, Error, Result};
use crate::hadamard::{is_classical, two_by_two_deformed, verify_hadamard, NCMatrix};

/// `‖1 + w + w²‖`.
pub fn cube_root_residual(w: &AlgElem) -> f64 {
    let one = AlgElem::identity(w.shape());
    (&(&one + w) + &(w * w)).norm()
}

#[derive(Clone, Debug)]
pub struct VanishingSum {
    /// `w = b a*`.
    pub w: AlgElem,
    /// `‖1 + w + w²‖`.
    pub residual: f64,
    /// `‖a + b + c‖`.
    pub sum_norm: f64,
}

/// Recovers `w = ba*` from a vanishing sum `a + b + c = 0` of unitaries.
pub fn extract_vanishing_sum_unit(a: &AlgElem, b: &AlgElem, c: &AlgElem, tol: f64) -> Result<VanishingSum> {
    check_tol(tol)?;
    a.shape().ensure_same(b.shape())?;
    a.shape().ensure_same(c.shape())?;
    for (name, e) in [("a", a), ("b", b), ("c", c)] {
        let r = e.unitarity_residual();
        if r > tol {
            return Err(Error::NotUnitary {
                what: name.to_string(),
                residual: r,
            });
        }
    }
    let sum_norm = (&(a + b) + c).norm();
    if sum_norm > tol {
        return Err(Error::NonVanishingSum { norm: sum_norm });
    }
    let w = b * &a.adjoint();
    let residual = cube_root_residual(&w);
    Ok(VanishingSum { w, residual, sum_norm })
}

fn pairwise_commutation(elems: &[&AlgElem]) -> f64 {
    let mut worst: f64 = 0.0;
    for p in 0..elems.len() {
        for q in p + 1..elems.len() {
            worst = worst.max(commutator_norm(elems[p], elems[q]));
        }
    }
    worst
}

#[derive(Clone, Debug, Serialize)]
pub struct CanonicalForm3x3 {
    #[serde(skip)]
    pub elements: [AlgElem; 6],
    pub tolerance: f64,
    /// Largest deviation of `H₂₂, H₂₃, H₃₃` from `w²ub, wuc, w²vc`.
    pub pattern_residual: f64,
    /// Same for the intermediate form `uv*w²vb, uv*wvc, w²vc`; diagnostic only.
    pub intermediate_pattern_residual: f64,
    /// Pairwise commutators of `(a, b, c)`.
    pub abc_commutation: f64,
    /// Pairwise commutators of `(u, v, w)`.
    pub uvw_commutation: f64,
    /// `‖1 + w + w²‖`.
    pub cube_root_residual: f64,
    pub classical: bool,
    pub classical_residual: f64,
    pub passed: bool,
}

impl CanonicalForm3x3 {
    pub fn a(&self) -> &AlgElem {
        &self.elements[0]
    }
    pub fn b(&self) -> &AlgElem {
        &self.elements[1]
    }
    pub fn c(&self) -> &AlgElem {
        &self.elements[2]
    }
    pub fn u(&self) -> &AlgElem {
        &self.elements[3]
    }
    pub fn v(&self) -> &AlgElem {
        &self.elements[4]
    }
    pub fn w(&self) -> &AlgElem {
        &self.elements[5]
    }
}

/// Reads `a, b, c` off the first row, `u = H₂₁a*`, `v = H₃₁a*`,
/// `w = H₃₂b*v*`, and checks the rest of the matrix against
///
/// ```text
/// a      b       c
/// ua     w²ub    wuc
/// va     wvb     w²vc
/// ```
pub fn canonical_form_3x3(h: &NCMatrix, tol: f64) -> Result<CanonicalForm3x3> {
    if h.rows() != 3 || h.cols() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "expected a 3x3 matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let report = verify_hadamard(h, tol)?;
    if !report.passed {
        return Err(Error::NotHadamard(Box::new(report)));
    }
    let (a, b, c) = (h.get(0, 0), h.get(0, 1), h.get(0, 2));
    let u = h.get(1, 0) * &a.adjoint();
    let v = h.get(2, 0) * &a.adjoint();
    let w = &(h.get(2, 1) * &b.adjoint()) * &v.adjoint();
    let w2 = &w * &w;

    let pattern = [
        (h.get(1, 1), &(&w2 * &u) * b),
        (h.get(1, 2), &(&w * &u) * c),
        (h.get(2, 2), &(&w2 * &v) * c),
    ];
    let pattern_residual = pattern.iter().map(|(x, y)| (*x - y).norm()).fold(0.0, f64::max);

    let uvs = &u * &v.adjoint();
    let intermediate = [
        (h.get(1, 1), &(&(&uvs * &w2) * &v) * b),
        (h.get(1, 2), &(&(&uvs * &w) * &v) * c),
        (h.get(2, 2), &(&w2 * &v) * c),
    ];
    let intermediate_pattern_residual = intermediate.iter().map(|(x, y)| (*x - y).norm()).fold(0.0, f64::max);

    let abc_commutation = pairwise_commutation(&[a, b, c]);
    let uvw_commutation = pairwise_commutation(&[&u, &v, &w]);
    let cube = cube_root_residual(&w);
    let cl = is_classical(h, tol)?;
    let passed = pattern_residual <= tol
        && abc_commutation <= tol
        && uvw_commutation <= tol
        && cube <= tol
        && cl.classical;
    Ok(CanonicalForm3x3 {
        elements: [a.clone(), b.clone(), c.clone(), u, v, w],
        tolerance: tol,
        pattern_residual,
        intermediate_pattern_residual,
        abc_commutation,
        uvw_commutation,
        cube_root_residual: cube,
        classical: cl.classical,
        classical_residual: cl.residual,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoByTwoReport {
    pub tolerance: f64,
    pub classical: bool,
    pub classical_residual: f64,
    /// `‖A + CD*B‖` for `H = [[A, B], [C, D]]`.
    pub relation_a: f64,
    /// `‖C + AB*D‖`.
    pub relation_c: f64,
    pub passed: bool,
}

/// For a 2×2 Hadamard `[[A, B], [C, D]]`, checks `A = −CD*B`, `C = −AB*D`
/// and classicality.
pub fn check_2x2(h: &NCMatrix, tol: f64) -> Result<TwoByTwoReport> {
    if h.rows() != 2 || h.cols() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "expected a 2x2 matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let report = verify_hadamard(h, tol)?;
    if !report.passed {
        return Err(Error::NotHadamard(Box::new(report)));
    }
    let (a, b, c, d) = (h.get(0, 0), h.get(0, 1), h.get(1, 0), h.get(1, 1));
    let relation_a = (a + &(&(c * &d.adjoint()) * b)).norm();
    let relation_c = (c + &(&(a * &b.adjoint()) * d)).norm();
    let cl = is_classical(h, tol)?;
    Ok(TwoByTwoReport {
        tolerance: tol,
        classical: cl.classical,
        classical_residual: cl.residual,
        relation_a,
        relation_c,
        passed: cl.classical && relation_a <= tol && relation_c <= tol,
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if current.len() == used.len() {
            out.push(current.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                current.push(i);
                rec(current, used, out);
                current.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Distance of a 4×4 matrix `G` from the deformed family
/// `[[x,y,x,y],[x,−y,x,−y],[z,t,−z,−t],[z,−t,−z,t]]` up to central row and
/// column scalings, for fixed row and column orders.
fn dita_pattern_distance(g: &NCMatrix) -> f64 {
    let (x, y, z, t) = (g.get(0, 0), g.get(0, 1), g.get(2, 0), g.get(2, 1));
    let base = match two_by_two_deformed(x, y, z, t) {
        Ok(b) => b,
        Err(_) => return f64::INFINITY,
    };
    let ratio = |i: usize, j: usize| g.get(i, j) * &base.get(i, j).adjoint();
    let one = AlgElem::identity(g.shape());
    let alpha = [one.clone(), ratio(1, 0), one.clone(), ratio(3, 0)];
    let beta = [one.clone(), one, ratio(0, 2), ratio(0, 3)];
    let mut worst = pairwise_commutation(&[x, y])
        .max(pairwise_commutation(&[x, z]))
        .max(pairwise_commutation(&[y, t]))
        .max(pairwise_commutation(&[z, t]));
    for s in alpha.iter().chain(&beta) {
        worst = worst.max(s.centrality_residual());
    }
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((&ratio(i, j) - &(&alpha[i] * &beta[j])).norm());
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DitaPatternMatch {
    pub residual: f64,
    pub row_order: Vec<usize>,
    pub col_order: Vec<usize>,
}

/// Best match of a 4×4 matrix against the deformed `F₂ ⊗_Q F₂` family over
/// all row and column orders, allowing central scalings. A small residual
/// means the matrix is equivalent to a member of the family; a large one is
/// not a proof of the contrary, since only these normalizations are tried.
pub fn match_dita_pattern(h: &NCMatrix) -> Result<DitaPatternMatch> {
    if h.rows() != 4 || h.cols() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "pattern matching needs a 4x4 matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let perms = permutations(4);
    let mut best = DitaPatternMatch {
        residual: f64::INFINITY,
        row_order: vec![0, 1, 2, 3],
        col_order: vec![0, 1, 2, 3],
    };
    for rp in &perms {
        for cp in &perms {
            let g = NCMatrix::from_fn(h.shape(), 4, 4, |i, j| h.get(rp[i], cp[j]).clone())?;
            let r = dita_pattern_distance(&g);
            if r < best.residual {
                best = DitaPatternMatch {
                    residual: r,
                    row_order: rp.clone(),
                    col_order: cp.clone(),
                };
            }
        }
    }
    Ok(best)
}

/// The element `e^{2πi/3}·1`.
pub fn primitive_cube_root(shape: &crate::algebra::AlgebraShape) -> AlgElem {
    AlgElem::scalar(shape, Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0))
}
