//! Seeded corpus of Hadamard matrices shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DVector;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nchadamard::algebra::Block;
use nchadamard::hadamard::{apply_equivalence, dita_deform, fourier, tensor, two_by_two_deformed, EquivalenceOp};
use nchadamard::{AlgElem, AlgebraShape, NCMatrix};

pub struct Case {
    pub name: String,
    pub h: NCMatrix,
}

pub fn shape(spec: &str) -> AlgebraShape {
    AlgebraShape::parse(spec).unwrap()
}

pub fn phase(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `[[x,1,x,1],[x,−1,x,−1],[1,t,−1,−t],[1,−t,−1,t]]` with Haar-random `x, t`.
pub fn deformed_f2(s: &AlgebraShape, seed: u64) -> NCMatrix {
    let one = AlgElem::identity(s);
    let x = AlgElem::random_unitary(s, 2 * seed);
    let t = AlgElem::random_unitary(s, 2 * seed + 1);
    two_by_two_deformed(&x, &one, &one, &t).unwrap()
}

pub fn random_central_unitary(s: &AlgebraShape, rng: &mut ChaCha8Rng) -> AlgElem {
    let values: Vec<Complex64> = (0..s.num_fibers()).map(|_| phase(rng.random_range(0.0..6.3))).collect();
    AlgElem::central(s, &values).unwrap()
}

pub fn random_permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Random legal equivalence operations: both permutations and a central
/// scaling of every row and column.
pub fn scramble_ops(h: &NCMatrix, rng: &mut ChaCha8Rng) -> Vec<EquivalenceOp> {
    let s = h.shape();
    let mut ops = vec![
        EquivalenceOp::PermuteRows(random_permutation(h.rows(), rng)),
        EquivalenceOp::PermuteCols(random_permutation(h.cols(), rng)),
    ];
    for row in 0..h.rows() {
        ops.push(EquivalenceOp::ScaleRow {
            row,
            unit: random_central_unitary(s, rng),
        });
    }
    for col in 0..h.cols() {
        ops.push(EquivalenceOp::ScaleCol {
            col,
            unit: random_central_unitary(s, rng),
        });
    }
    ops
}

pub fn scramble(h: &NCMatrix, seed: u64) -> NCMatrix {
    let mut rng = rng(seed);
    scramble_ops(h, &mut rng)
        .iter()
        .fold(h.clone(), |acc, op| apply_equivalence(&acc, op, 1e-9).unwrap())
}

/// `V diag(h¹_ij, h²_ij) V*` for two scalar Hadamard matrices: classical but
/// with non-central entries over `M_2`.
pub fn conjugated_pair(h1: &NCMatrix, h2: &NCMatrix, seed: u64) -> NCMatrix {
    let s = shape("2");
    let v = AlgElem::random_unitary(&s, seed);
    NCMatrix::from_fn(&s, h1.rows(), h1.cols(), |i, j| {
        let d = DVector::from_vec(vec![h1.get(i, j).block(0)[(0, 0)], h2.get(i, j).block(0)[(0, 0)]]);
        let diag = AlgElem::from_blocks(s.clone(), vec![Block::from_diagonal(&d)]).unwrap();
        &(&v * &diag) * &v.adjoint()
    })
    .unwrap()
}

/// `Q ∈ M_{N×M}(ℂ)` with seeded random phases.
pub fn scalar_q(s: &AlgebraShape, n: usize, m: usize, seed: u64) -> NCMatrix {
    let mut r = rng(seed);
    let values: Vec<Complex64> = (0..n * m).map(|_| phase(r.random_range(0.0..6.3))).collect();
    NCMatrix::from_fn(s, n, m, |i, j| AlgElem::scalar(s, values[i * m + j])).unwrap()
}

/// `[[x, 1], [1, t]]`, the coefficient matrix producing the deformed `F_2 ⊗ F_2`.
pub fn noncommutative_q(s: &AlgebraShape, seed: u64) -> NCMatrix {
    let one = AlgElem::identity(s);
    let x = AlgElem::random_unitary(s, 2 * seed);
    let t = AlgElem::random_unitary(s, 2 * seed + 1);
    NCMatrix::new(s.clone(), 2, 2, vec![x, one.clone(), one, t]).unwrap()
}

pub fn corpus() -> Vec<Case> {
    let mut out = Vec::new();
    let mut push = |name: String, h: NCMatrix| out.push(Case { name, h });
    for spec in ["1", "2", "1,2"] {
        for n in 2..=6 {
            push(format!("F_{n} over [{spec}]"), fourier(n, &shape(spec)).unwrap());
        }
    }
    let s1 = shape("1");
    let s2 = shape("2");
    let f2 = fourier(2, &s1).unwrap();
    let f3 = fourier(3, &s1).unwrap();
    push("F_2 x F_3".into(), tensor(&f2, &f3, 1e-9).unwrap());
    push(
        "F_2 x_Q F_3, scalar Q".into(),
        dita_deform(&f2, &f3, &scalar_q(&s1, 2, 3, 17), 1e-9).unwrap(),
    );
    for seed in 0..5 {
        push(format!("deformed F_2 x F_2 over [2], seed {seed}"), deformed_f2(&s2, seed));
    }
    push("deformed F_2 x F_2 over [1,2]".into(), deformed_f2(&shape("1,2"), 9));
    push("F_3 scrambled over [1,1]".into(), scramble(&fourier(3, &shape("1,1")).unwrap(), 3));
    push("F_4 scrambled over [2]".into(), scramble(&fourier(4, &s2).unwrap(), 4));
    push("conjugated F_3 pair".into(), conjugated_pair(&f3, &scramble(&f3, 5), 6));
    push("conjugated F_2 pair".into(), conjugated_pair(&f2, &scramble(&f2, 7), 8));
    out
}
