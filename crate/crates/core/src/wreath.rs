//! Magic unitaries of deformed tensor products `L = H ⊗_Q K` and their
//! factorization through a free wreath product.
//!
//! With `P = (P_{ia,jb})` the magic unitary of `L` and `R` the magic unitary
//! of `H`, the checks here are
//!
//! * `P_{ia,jb} = R_ij ⊗ (1/M)(Q_ic Q_jc* Q_jd Q_id* · K_ac K_bc* K_bd K_ad*)_{cd}`,
//! * `V_ij = Σ_a P_{ia,jb}` does not depend on `b` and equals `R_ij ⊗ 1`,
//! * each `U⁽ⁱ⁾ = (Σ_j P_{ia,jb})_{ab}` is magic,
//! * `U⁽ⁱ⁾_ab V_ij = V_ij U⁽ⁱ⁾_ab = P_{ia,jb}`.
//!
//! Double indices `(i, a)` flatten to `i·M + a` throughout.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{AlgElem, AlgebraShape};
use crate::error::{check_tol, Error, Result};
use crate::hadamard::{dita_deform, NCMatrix};
use crate::magic::{build_magic, verify_magic, MagicReport, MagicUnitary};

/// Sizes `N` (of `H`) and `M` (of `K`) of a product matrix of size `N·M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ProductLayout {
    pub n: usize,
    pub m: usize,
}

impl ProductLayout {
    pub fn index(&self, outer: usize, inner: usize) -> usize {
        outer * self.m + inner
    }

    fn check(&self, p: &MagicUnitary) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.n * self.m != p.size() {
            return Err(Error::LayoutMismatch(format!(
                "magic unitary of size {} does not factor as N={} times M={}",
                p.size(),
                self.n,
                self.m
            )));
        }
        Ok(())
    }
}

fn base_shape(amplified: &AlgebraShape, factor: usize) -> Result<AlgebraShape> {
    let fibers = amplified
        .fibers()
        .iter()
        .map(|&k| {
            if k % factor == 0 {
                Ok(k / factor)
            } else {
                Err(Error::LayoutMismatch(format!(
                    "algebra {amplified} is not an amplification by {factor}"
                )))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    AlgebraShape::new(fibers)
}

/// Largest operator-norm difference between the magic unitary of
/// `H ⊗_Q K` and the closed-form tensor expression built from `R`, `Q`, `K`.
pub fn verify_product_formula(h: &NCMatrix, k: &NCMatrix, q: &NCMatrix, tol: f64) -> Result<f64> {
    let l = dita_deform(h, k, q, tol)?;
    let n = h.rows();
    let m = k.rows();
    let layout = ProductLayout { n, m };
    let shape = h.shape();
    let p = build_magic(&l, tol)?;
    let r = build_magic(h, tol)?;
    let inv_m = Complex64::new(1.0 / m as f64, 0.0);

    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let rij = NCMatrix::from_amplified(r.get(i, j), n, shape)?;
            for a in 0..m {
                for b in 0..m {
                    let s = NCMatrix::from_fn(shape, m, m, |c, d| {
                        let qs = &(&(q.get(i, c) * &q.get(j, c).adjoint()) * q.get(j, d)) * &q.get(i, d).adjoint();
                        let ks = &(&(k.get(a, c) * &k.get(b, c).adjoint()) * k.get(b, d)) * &k.get(a, d).adjoint();
                        (&qs * &ks).scale(inv_m)
                    })?;
                    let predicted = NCMatrix::from_fn(shape, n * m, n * m, |row, col| {
                        let (kk, c) = (row / m, row % m);
                        let (l, d) = (col / m, col % m);
                        rij.get(kk, l) * s.get(c, d)
                    })?
                    .to_amplified()?;
                    let actual = p.get(layout.index(i, a), layout.index(j, b));
                    worst = worst.max((actual - &predicted).norm());
                }
            }
        }
    }
    Ok(worst)
}

/// The elements `V_ij` and `U⁽ⁱ⁾_ab` extracted from a product magic unitary.
#[derive(Clone, Debug)]
pub struct WreathComponents {
    pub layout: ProductLayout,
    /// `V_ij = Σ_a P_{ia,j0}`, row-major `N×N`.
    pub v: Vec<AlgElem>,
    /// `U⁽ⁱ⁾` for each `i`.
    pub u: Vec<MagicUnitary>,
    /// Largest `‖V_ij(b) − V_ij(b')‖` over all `b, b'`.
    pub b_independence_residual: f64,
}

impl WreathComponents {
    pub fn v(&self, i: usize, j: usize) -> &AlgElem {
        &self.v[i * self.layout.n + j]
    }

    /// `max ‖V_ij − R_ij ⊗ 1_M‖`, with `R` the magic unitary of the outer factor.
    pub fn tensor_identity_residual(&self, r: &MagicUnitary) -> Result<f64> {
        let ProductLayout { n, m } = self.layout;
        if r.size() != n {
            return Err(Error::LayoutMismatch(format!(
                "outer magic unitary has size {}, expected {n}",
                r.size()
            )));
        }
        let base = base_shape(r.algebra(), n)?;
        let zero = AlgElem::zero(&base);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let rij = NCMatrix::from_amplified(r.get(i, j), n, &base)?;
                let lifted = NCMatrix::from_fn(&base, n * m, n * m, |row, col| {
                    if row % m == col % m {
                        rij.get(row / m, col / m).clone()
                    } else {
                        zero.clone()
                    }
                })?
                .to_amplified()?;
                if lifted.shape() != self.v(i, j).shape() {
                    return Err(Error::LayoutMismatch(format!(
                        "outer magic unitary lives over {base}, product over {}",
                        self.v(i, j).shape()
                    )));
                }
                worst = worst.max((self.v(i, j) - &lifted).norm());
            }
        }
        Ok(worst)
    }
}

/// Extracts `V` and `U` from the magic unitary of a product of layout `layout`.
pub fn compute_components(p: &MagicUnitary, layout: ProductLayout) -> Result<WreathComponents> {
    layout.check(p)?;
    let ProductLayout { n, m } = layout;
    let algebra = p.algebra();

    let mut v = Vec::with_capacity(n * n);
    let mut b_dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let per_b: Vec<AlgElem> = (0..m)
                .map(|b| {
                    (0..m).fold(AlgElem::zero(algebra), |acc, a| {
                        &acc + p.get(layout.index(i, a), layout.index(j, b))
                    })
                })
                .collect();
            for b in 0..m {
                for b2 in b + 1..m {
                    b_dev = b_dev.max((&per_b[b] - &per_b[b2]).norm());
                }
            }
            v.push(per_b.into_iter().next().expect("m >= 1"));
        }
    }

    let u = (0..n)
        .map(|i| {
            let entries = (0..m)
                .flat_map(|a| (0..m).map(move |b| (a, b)))
                .map(|(a, b)| {
                    (0..n).fold(AlgElem::zero(algebra), |acc, j| {
                        &acc + p.get(layout.index(i, a), layout.index(j, b))
                    })
                })
                .collect();
            MagicUnitary::new(m, algebra.clone(), entries)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(WreathComponents {
        layout,
        v,
        u,
        b_independence_residual: b_dev,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorizationReport {
    pub tolerance: f64,
    /// Worst residuals of the magic checks over all `U⁽ⁱ⁾`.
    pub u_magic: MagicReport,
    /// `max ‖U⁽ⁱ⁾_ab V_ij − P_{ia,jb}‖`.
    pub residual_uv: f64,
    /// `max ‖V_ij U⁽ⁱ⁾_ab − P_{ia,jb}‖`.
    pub residual_vu: f64,
    pub passed: bool,
}

pub fn verify_factorization(c: &WreathComponents, p: &MagicUnitary, tol: f64) -> Result<FactorizationReport> {
    check_tol(tol)?;
    let layout = c.layout;
    layout.check(p)?;
    let ProductLayout { n, m } = layout;
    if c.u.len() != n || c.v.len() != n * n || c.u.iter().any(|u| u.size() != m) {
        return Err(Error::LayoutMismatch("components do not match their layout".into()));
    }
    if c.v[0].shape() != p.algebra() {
        return Err(Error::ShapeMismatch {
            left: c.v[0].shape().clone(),
            right: p.algebra().clone(),
        });
    }

    let mut u_magic = MagicReport {
        size: m,
        tolerance: tol,
        residual_self_adjoint: 0.0,
        residual_idempotent: 0.0,
        residual_row_sums: 0.0,
        residual_col_sums: 0.0,
        passed: true,
    };
    for u in &c.u {
        let r = verify_magic(u, tol)?;
        u_magic.residual_self_adjoint = u_magic.residual_self_adjoint.max(r.residual_self_adjoint);
        u_magic.residual_idempotent = u_magic.residual_idempotent.max(r.residual_idempotent);
        u_magic.residual_row_sums = u_magic.residual_row_sums.max(r.residual_row_sums);
        u_magic.residual_col_sums = u_magic.residual_col_sums.max(r.residual_col_sums);
    }
    u_magic.passed = u_magic.max_residual() <= tol;

    let mut uv: f64 = 0.0;
    let mut vu: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let vij = c.v(i, j);
            for a in 0..m {
                for b in 0..m {
                    let uab = c.u[i].get(a, b);
                    let target = p.get(layout.index(i, a), layout.index(j, b));
                    uv = uv.max((&(uab * vij) - target).norm());
                    vu = vu.max((&(vij * uab) - target).norm());
                }
            }
        }
    }

    Ok(FactorizationReport {
        tolerance: tol,
        passed: u_magic.passed && uv <= tol && vu <= tol,
        u_magic,
        residual_uv: uv,
        residual_vu: vu,
    })
}

/// Every check above for one triple `(H, K, Q)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WreathReport {
    pub layout: ProductLayout,
    pub tolerance: f64,
    pub product_formula_residual: f64,
    pub b_independence_residual: f64,
    pub v_tensor_residual: f64,
    pub factorization: FactorizationReport,
    pub passed: bool,
}

pub fn wreath_check(h: &NCMatrix, k: &NCMatrix, q: &NCMatrix, tol: f64) -> Result<WreathReport> {
    let product_formula_residual = verify_product_formula(h, k, q, tol)?;
    let layout = ProductLayout {
        n: h.rows(),
        m: k.rows(),
    };
    let l = dita_deform(h, k, q, tol)?;
    let p = build_magic(&l, tol)?;
    let r = build_magic(h, tol)?;
    let comps = compute_components(&p, layout)?;
    let v_tensor_residual = comps.tensor_identity_residual(&r)?;
    let factorization = verify_factorization(&comps, &p, tol)?;
    let passed = product_formula_residual <= tol
        && comps.b_independence_residual <= tol
        && v_tensor_residual <= tol
        && factorization.passed;
    Ok(WreathReport {
        layout,
        tolerance: tol,
        product_formula_residual,
        b_independence_residual: comps.b_independence_residual,
        v_tensor_residual,
        factorization,
        passed,
    })
}
