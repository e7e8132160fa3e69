//! Dense brute-force oracles shared by the integration tests. They build
//! full 2^n matrices with Kronecker products and never touch the library's
//! in-place kernels.
#![allow(dead_code)]

use mbqc_core::linalg::{self, Matrix};
use mbqc_core::{StateVector, C64};
use nalgebra::DVector;

pub fn embed(u: &Matrix, q: usize, n: usize) -> Matrix {
    let id = linalg::identity(2);
    (0..n).fold(linalg::identity(1), |acc, k| linalg::kron(&acc, if k == q { u } else { &id }))
}

pub fn dense_cz(a: usize, b: usize, n: usize) -> Matrix {
    let d = 1usize << n;
    let diag: Vec<C64> = (0..d)
        .map(|i| {
            let bit = |q: usize| (i >> (n - 1 - q)) & 1;
            if bit(a) == 1 && bit(b) == 1 { C64::new(-1.0, 0.0) } else { C64::new(1.0, 0.0) }
        })
        .collect();
    Matrix::from_diagonal(&DVector::from_vec(diag))
}

pub fn plus_vec(n: usize) -> DVector<C64> {
    let d = 1usize << n;
    DVector::from_element(d, C64::new(1.0 / (d as f64).sqrt(), 0.0))
}

/// CZ on every edge applied to |+⟩^⊗n.
pub fn dense_graph_state(n: usize, edges: &[(usize, usize)]) -> DVector<C64> {
    let mut v = plus_vec(n);
    for &(a, b) in edges {
        v = dense_cz(a, b, n) * v;
    }
    v
}

pub fn to_vec(psi: &StateVector) -> DVector<C64> {
    DVector::from_column_slice(psi.amplitudes())
}

pub fn overlap_sq(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    a.dotc(b).norm_sqr()
}

pub fn pauli_dense(letters: &str) -> Matrix {
    letters.chars().fold(linalg::identity(1), |acc, c| {
        let m = match c {
            'I' => linalg::identity(2),
            'X' => linalg::pauli_x(),
            'Y' => linalg::pauli_y(),
            'Z' => linalg::pauli_z(),
            _ => panic!("bad letter {c}"),
        };
        linalg::kron(&acc, &m)
    })
}

/// Max |a_ij - b_ij|.
pub fn max_diff(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
