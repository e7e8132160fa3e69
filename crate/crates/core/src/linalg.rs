//! Small-matrix helpers and the in-place gate kernel shared by state vectors
//! and density matrices.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

fn mat2(a: C64, b: C64, c: C64, d: C64) -> Matrix {
    DMatrix::from_row_slice(2, 2, &[a, b, c, d])
}

pub fn identity(dim: usize) -> Matrix {
    DMatrix::identity(dim, dim)
}

pub fn hadamard() -> Matrix {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    mat2(h, h, h, -h)
}

pub fn pauli_x() -> Matrix {
    mat2(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> Matrix {
    mat2(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> Matrix {
    mat2(ONE, ZERO, ZERO, -ONE)
}

/// diag(1, e^{iφ}).
pub fn phase(phi: f64) -> Matrix {
    mat2(ONE, ZERO, ZERO, C64::from_polar(1.0, phi))
}

/// exp(-iθZ/2).
pub fn rz(theta: f64) -> Matrix {
    mat2(
        C64::from_polar(1.0, -theta / 2.0),
        ZERO,
        ZERO,
        C64::from_polar(1.0, theta / 2.0),
    )
}

/// exp(-iθX/2).
pub fn rx(theta: f64) -> Matrix {
    let c = C64::new((theta / 2.0).cos(), 0.0);
    let s = C64::new(0.0, -(theta / 2.0).sin());
    mat2(c, s, s, c)
}

/// exp(-iθY/2).
pub fn ry(theta: f64) -> Matrix {
    let c = C64::new((theta / 2.0).cos(), 0.0);
    let s = C64::new((theta / 2.0).sin(), 0.0);
    mat2(c, -s, s, c)
}

pub fn cz() -> Matrix {
    let mut m = identity(4);
    m[(3, 3)] = -ONE;
    m
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

pub fn dagger(m: &Matrix) -> Matrix {
    m.adjoint()
}

/// Largest entry of |U U† - 1|.
pub fn unitarity_deviation(u: &Matrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let p = u * u.adjoint();
    let mut worst = 0.0f64;
    for r in 0..p.nrows() {
        for c in 0..p.ncols() {
            let target = if r == c { ONE } else { ZERO };
            worst = worst.max((p[(r, c)] - target).norm());
        }
    }
    worst
}

pub fn is_unitary(u: &Matrix, tol: f64) -> bool {
    unitarity_deviation(u) <= tol
}

/// Largest entry-wise distance between `a` and `e^{iφ} b` after fixing the
/// phase from the largest entry of `b`.
pub fn distance_up_to_phase(a: &Matrix, b: &Matrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    let (mut best, mut idx) = (0.0, (0, 0));
    for r in 0..b.nrows() {
        for c in 0..b.ncols() {
            if b[(r, c)].norm() > best {
                best = b[(r, c)].norm();
                idx = (r, c);
            }
        }
    }
    if best == 0.0 {
        return a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    let ph = a[idx] / b[idx];
    let ph = ph / ph.norm();
    let mut worst = 0.0f64;
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            worst = worst.max((a[(r, c)] - ph * b[(r, c)]).norm());
        }
    }
    worst
}

pub(crate) fn check_targets(targets: &[usize], num_qubits: usize) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= num_qubits {
            return Err(Error::QubitOutOfRange { index: t, num_qubits });
        }
        if targets[..i].contains(&t) {
            return Err(Error::DuplicateQubit(t));
        }
    }
    Ok(())
}

/// Apply `u` to the listed qubits of a flat amplitude array over `n` qubits.
/// `targets[0]` is the most significant qubit of `u`. No validation.
pub(crate) fn apply_in_place(amps: &mut [C64], n: usize, u: &Matrix, targets: &[usize]) {
    let k = targets.len();
    let dim = 1usize << k;
    debug_assert_eq!(u.nrows(), dim);
    let positions: Vec<usize> = targets.iter().map(|&t| n - 1 - t).collect();
    let mask: usize = positions.iter().map(|&p| 1usize << p).sum();
    let offsets: Vec<usize> = (0..dim)
        .map(|j| {
            (0..k)
                .filter(|&i| (j >> (k - 1 - i)) & 1 == 1)
                .map(|i| 1usize << positions[i])
                .sum()
        })
        .collect();

    if k == 1 {
        let (a, b, c, d) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
        let off = offsets[1];
        for base in 0..amps.len() {
            if base & mask != 0 {
                continue;
            }
            let x0 = amps[base];
            let x1 = amps[base + off];
            amps[base] = a * x0 + b * x1;
            amps[base + off] = c * x0 + d * x1;
        }
        return;
    }

    let mut tmp = vec![ZERO; dim];
    for base in 0..amps.len() {
        if base & mask != 0 {
            continue;
        }
        for j in 0..dim {
            tmp[j] = amps[base + offsets[j]];
        }
        for r in 0..dim {
            let mut acc = ZERO;
            for c in 0..dim {
                acc += u[(r, c)] * tmp[c];
            }
            amps[base + offsets[r]] = acc;
        }
    }
}

/// Matrix exponential exp(-i t P) for a Hermitian involution P (P² = 1).
pub fn exp_involution(p: &Matrix, t: f64) -> Matrix {
    let d = p.nrows();
    identity(d) * C64::new(t.cos(), 0.0) - p * C64::new(0.0, t.sin())
}
