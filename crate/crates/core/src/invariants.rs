//! Character moments of the quantum permutation group attached to a magic
//! unitary `P`.
//!
//! With `φ = tr ∘ π` the state obtained from the normalized trace on the
//! algebra of `P`, the convolution powers satisfy `φ^{*n}(χᵏ) = Tr(M_kⁿ)`
//! where `M_k` is the transfer matrix
//!
//! ```text
//! M_k[(i₁…i_k), (j₁…j_k)] = tr(P_{i₁j₁} P_{i₂j₂} ⋯ P_{i_kj_k})
//! ```
//!
//! The Cesàro limit of `φ^{*n}` is an idempotent state, and its value on `χᵏ`
//! is the multiplicity of the eigenvalue 1 of `M_k` (other unimodular
//! eigenvalues average out). These idempotent-state moments are what
//! [`estimate_moments`] reports; for Fourier matrices they coincide with the
//! Haar moments `N^{k−1}` of `ℤ_N`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::AlgElem;
use crate::error::{check_tol, Error, Result};
use crate::magic::MagicUnitary;

pub const DEFAULT_CAP: usize = 4096;
pub const DEFAULT_EIG_TOL: f64 = 1e-6;
/// Number of terms in the Cesàro cross-check.
pub const CESARO_TERMS: usize = 200;
/// Eigenvalues with `|λ| > 1 + SPECTRAL_SLACK` raise a flag.
pub const SPECTRAL_SLACK: f64 = 1e-8;
/// Accepted and rejected eigenvalues must be separated by this multiple of
/// the eigenvalue tolerance.
pub const SEPARATION_FACTOR: f64 = 10.0;
/// Above this dimension the Cesàro sum is evaluated from the spectrum
/// instead of explicit matrix powers.
pub const CESARO_POWER_LIMIT: usize = 256;

const SCHUR_EPS_LADDER: [f64; 4] = [f64::EPSILON, 1e-14, 1e-13, 1e-12];

pub const FLAG_SPECTRAL_RADIUS: &str = "spectral_radius_exceeds_one";
pub const FLAG_ILL_SEPARATED: &str = "ill_separated_spectrum";
pub const FLAG_NO_FIXED_VECTOR: &str = "no_fixed_vector";
pub const FLAG_COMPLEX_TRACE: &str = "complex_cesaro_trace";

/// The transfer matrix `M_k`, indexed by multi-indices flattened
/// `i₁`-major.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentMatrix {
    degree: usize,
    size: usize,
    matrix: DMatrix<Complex64>,
}

impl MomentMatrix {
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Size `N` of the underlying magic unitary.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Eigenvalues from a complex Schur decomposition. The QR iteration is
    /// capped; if it stalls at machine precision the deflation threshold is
    /// relaxed step by step down to `1e-12`.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        let max_iters = 200 * self.dim().max(50);
        for eps in SCHUR_EPS_LADDER {
            if let Some(schur) = self.matrix.clone().try_schur(eps, max_iters) {
                let (_, t) = schur.unpack();
                return Ok((0..t.nrows()).map(|i| t[(i, i)]).collect());
            }
        }
        Err(Error::EigenNotConverged { dim: self.dim() })
    }
}

fn checked_dim(n: usize, k: usize, cap: usize) -> Result<usize> {
    match u32::try_from(k).ok().and_then(|k| n.checked_pow(k)) {
        Some(d) if d <= cap => Ok(d),
        Some(d) => Err(Error::CapExceeded { dim: d, cap }),
        None => Err(Error::CapExceeded { dim: usize::MAX, cap }),
    }
}

/// `tr(AB)` without forming the product.
fn trace_of_product(a: &AlgElem, b: &AlgElem) -> Complex64 {
    let m = a.blocks().len() as f64;
    a.blocks()
        .iter()
        .zip(b.blocks())
        .map(|(x, y)| {
            let k = x.nrows();
            let mut s = Complex64::new(0.0, 0.0);
            for p in 0..k {
                for q in 0..k {
                    s += x[(p, q)] * y[(q, p)];
                }
            }
            s / k as f64
        })
        .sum::<Complex64>()
        / m
}

/// Fills the entries below one prefix product. `row` and `col` are the
/// partial flattened indices of the prefix.
fn fill(p: &MagicUnitary, prefix: &AlgElem, remaining: usize, row: usize, col: usize, out: &mut Vec<(usize, usize, Complex64)>) {
    let n = p.size();
    for i in 0..n {
        for j in 0..n {
            let (r, c) = (row * n + i, col * n + j);
            if remaining == 1 {
                out.push((r, c, trace_of_product(prefix, p.get(i, j))));
            } else {
                let next = prefix * p.get(i, j);
                fill(p, &next, remaining - 1, r, c, out);
            }
        }
    }
}

/// Assembles `M_k`, rejecting `N^k > cap`.
pub fn build_moment_matrix(p: &MagicUnitary, k: usize, cap: usize) -> Result<MomentMatrix> {
    if k == 0 {
        return Err(Error::InvalidArgument("moment degree must be at least 1".into()));
    }
    let n = p.size();
    let dim = checked_dim(n, k, cap)?;
    let tails: Vec<Vec<(usize, usize, Complex64)>> = (0..n * n)
        .into_par_iter()
        .map(|ij| {
            let (i, j) = (ij / n, ij % n);
            let mut out = Vec::new();
            if k == 1 {
                out.push((i, j, p.get(i, j).normalized_trace()));
            } else {
                fill(p, p.get(i, j), k - 1, i, j, &mut out);
            }
            out
        })
        .collect();
    let mut matrix = DMatrix::zeros(dim, dim);
    for (r, c, v) in tails.into_iter().flatten() {
        matrix[(r, c)] = v;
    }
    Ok(MomentMatrix {
        degree: k,
        size: n,
        matrix,
    })
}

/// `(1/n) Σ_{m=1..n} Tr(Mᵐ)` as a complex number.
pub fn cesaro_trace_complex(m: &MomentMatrix, n: usize) -> Result<Complex64> {
    assert!(n >= 1, "Cesàro mean needs at least one term");
    let mut sum = Complex64::new(0.0, 0.0);
    if m.dim() <= CESARO_POWER_LIMIT {
        let mut power = m.matrix.clone();
        for step in 1..=n {
            sum += power.trace();
            if step < n {
                power = &power * &m.matrix;
            }
        }
    } else {
        for lambda in m.eigenvalues()? {
            let mut z = lambda;
            for _ in 1..=n {
                sum += z;
                z *= lambda;
            }
        }
    }
    Ok(sum / n as f64)
}

/// Real part of the Cesàro mean of `Tr(Mᵐ)`. The imaginary part vanishes up
/// to rounding because `χᵏ` is self-adjoint; [`estimate_moments`] flags it
/// when it does not.
pub fn cesaro_trace(m: &MomentMatrix, n: usize) -> Result<f64> {
    Ok(cesaro_trace_complex(m, n)?.re)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeMoment {
    pub k: usize,
    /// Multiplicity of the eigenvalue 1 of `M_k`.
    pub moment: u64,
    /// Smallest `|λ − 1|` over eigenvalues not counted in `moment`; absent
    /// when every eigenvalue was counted.
    pub gap: Option<f64>,
    pub cesaro200: f64,
    pub spectral_radius: f64,
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub label: &'static str,
    pub size: usize,
    pub eig_tol: f64,
    pub cap: usize,
    pub moments: Vec<u64>,
    pub degrees: Vec<DegreeMoment>,
}

impl MomentReport {
    pub fn flagged(&self) -> bool {
        self.degrees.iter().any(|d| !d.flags.is_empty())
    }
}

pub fn degree_moment(m: &MomentMatrix, eig_tol: f64) -> Result<DegreeMoment> {
    check_tol(eig_tol)?;
    let eig = m.eigenvalues()?;
    let one = Complex64::new(1.0, 0.0);
    let mut moment = 0u64;
    let mut gap: Option<f64> = None;
    let mut radius: f64 = 0.0;
    for lambda in &eig {
        let d = (lambda - one).norm();
        radius = radius.max(lambda.norm());
        if d <= eig_tol {
            moment += 1;
        } else {
            gap = Some(gap.map_or(d, |g| g.min(d)));
        }
    }
    let cesaro = cesaro_trace_complex(m, CESARO_TERMS)?;
    let mut flags = Vec::new();
    if radius > 1.0 + SPECTRAL_SLACK {
        flags.push(FLAG_SPECTRAL_RADIUS.to_string());
    }
    if gap.is_some_and(|g| g < SEPARATION_FACTOR * eig_tol) {
        flags.push(FLAG_ILL_SEPARATED.to_string());
    }
    if moment == 0 {
        flags.push(FLAG_NO_FIXED_VECTOR.to_string());
    }
    if cesaro.im.abs() > SPECTRAL_SLACK {
        flags.push(FLAG_COMPLEX_TRACE.to_string());
    }
    Ok(DegreeMoment {
        k: m.degree(),
        moment,
        gap,
        cesaro200: cesaro.re,
        spectral_radius: radius,
        flags,
    })
}

/// Moments `c_1, …, c_kmax` read off as eigenvalue-1 multiplicities.
pub fn estimate_moments(p: &MagicUnitary, kmax: usize, eig_tol: f64, cap: usize) -> Result<MomentReport> {
    if kmax == 0 {
        return Err(Error::InvalidArgument("kmax must be at least 1".into()));
    }
    check_tol(eig_tol)?;
    checked_dim(p.size(), kmax, cap)?;
    let degrees = (1..=kmax)
        .into_par_iter()
        .map(|k| build_moment_matrix(p, k, cap).and_then(|m| degree_moment(&m, eig_tol)))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentReport {
        label: "idempotent-state moments",
        size: p.size(),
        eig_tol,
        cap,
        moments: degrees.iter().map(|d| d.moment).collect(),
        degrees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraShape;
    use crate::hadamard::fourier;
    use crate::magic::build_magic;

    fn fourier_magic(n: usize) -> MagicUnitary {
        build_magic(&fourier(n, &AlgebraShape::scalar()).unwrap(), 1e-12).unwrap()
    }

    #[test]
    fn f2_first_degree() {
        let m = build_moment_matrix(&fourier_magic(2), 1, DEFAULT_CAP).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                assert!((m.matrix()[(r, c)] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn first_degree_rows_sum_to_one() {
        let shape = AlgebraShape::matrix(2).unwrap();
        let one = AlgElem::identity(&shape);
        let x = AlgElem::random_unitary(&shape, 1);
        let t = AlgElem::random_unitary(&shape, 2);
        let h = crate::hadamard::two_by_two_deformed(&x, &one, &one, &t).unwrap();
        let p = build_magic(&h, 1e-10).unwrap();
        let m = build_moment_matrix(&p, 1, DEFAULT_CAP).unwrap();
        for r in 0..4 {
            let s: Complex64 = m.matrix().row(r).iter().sum();
            assert!((s - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn f2_second_degree_has_two_fixed_directions() {
        let m = build_moment_matrix(&fourier_magic(2), 2, DEFAULT_CAP).unwrap();
        assert_eq!(m.dim(), 4);
        let d = degree_moment(&m, DEFAULT_EIG_TOL).unwrap();
        assert_eq!(d.moment, 2);
        assert!(d.flags.is_empty());
    }

    #[test]
    fn cap_is_enforced() {
        match build_moment_matrix(&fourier_magic(3), 3, 26) {
            Err(Error::CapExceeded { dim: 27, cap: 26 }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(estimate_moments(&fourier_magic(2), 40, 1e-6, DEFAULT_CAP).is_err());
        assert!(build_moment_matrix(&fourier_magic(2), 0, DEFAULT_CAP).is_err());
    }

    #[test]
    fn cesaro_of_identity_is_dimension() {
        let m = MomentMatrix {
            degree: 1,
            size: 3,
            matrix: DMatrix::identity(3, 3),
        };
        for n in [1, 7, 200] {
            assert!((cesaro_trace(&m, n).unwrap() - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cesaro_f2_first_degree() {
        let m = build_moment_matrix(&fourier_magic(2), 1, DEFAULT_CAP).unwrap();
        assert!((cesaro_trace(&m, 200).unwrap() - 1.0).abs() < 0.02);
    }

    #[test]
    fn cesaro_rotation_averages_out() {
        // eigenvalues ±i: traces cycle 0,-2,0,2 with mean zero over full periods
        let mut matrix = DMatrix::zeros(2, 2);
        matrix[(0, 1)] = Complex64::new(-1.0, 0.0);
        matrix[(1, 0)] = Complex64::new(1.0, 0.0);
        let m = MomentMatrix { degree: 1, size: 2, matrix };
        let v = cesaro_trace(&m, 200).unwrap();
        assert!(v.abs() <= 2.0);
        assert!(v.abs() < 1e-12);
        let d = degree_moment(&m, 1e-6).unwrap();
        assert_eq!(d.moment, 0);
        assert!(d.flags.contains(&FLAG_NO_FIXED_VECTOR.to_string()));
    }

    #[test]
    fn ill_separated_spectrum_is_flagged() {
        let mut matrix = DMatrix::zeros(2, 2);
        matrix[(0, 0)] = Complex64::new(1.0, 0.0);
        matrix[(1, 1)] = Complex64::new(1.0 - 5e-6, 0.0);
        let m = MomentMatrix { degree: 1, size: 2, matrix };
        let d = degree_moment(&m, 1e-6).unwrap();
        assert_eq!(d.moment, 1);
        assert!(d.flags.contains(&FLAG_ILL_SEPARATED.to_string()));
    }

    #[test]
    fn large_spectral_radius_is_flagged() {
        let matrix = DMatrix::from_diagonal_element(2, 2, Complex64::new(1.5, 0.0));
        let m = MomentMatrix { degree: 1, size: 2, matrix };
        let d = degree_moment(&m, 1e-6).unwrap();
        assert!(d.flags.contains(&FLAG_SPECTRAL_RADIUS.to_string()));
    }

    #[test]
    fn fourier_moments() {
        let r = estimate_moments(&fourier_magic(2), 4, DEFAULT_EIG_TOL, DEFAULT_CAP).unwrap();
        assert_eq!(r.moments, vec![1, 2, 4, 8]);
        assert!(!r.flagged());
        let r = estimate_moments(&fourier_magic(3), 3, DEFAULT_EIG_TOL, DEFAULT_CAP).unwrap();
        assert_eq!(r.moments, vec![1, 3, 9]);
    }
}
