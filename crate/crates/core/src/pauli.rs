//! Signed Pauli strings with exact phase tracking.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, ONE};
use crate::state::{DensityMatrix, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' | 'i' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn matrix(self) -> Matrix {
        match self {
            Pauli::I => linalg::identity(2),
            Pauli::X => linalg::pauli_x(),
            Pauli::Y => linalg::pauli_y(),
            Pauli::Z => linalg::pauli_z(),
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// a·b = i^k c.
    pub fn product(a: Pauli, b: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        let k = match (a, b) {
            (X, Y) | (Y, Z) | (Z, X) => 1,
            (Y, X) | (Z, Y) | (X, Z) => 3,
            _ => 0,
        };
        let (ax, az) = a.bits();
        let (bx, bz) = b.bits();
        (k, Pauli::from_bits(ax ^ bx, az ^ bz))
    }
}

/// i^phase · P_0 ⊗ P_1 ⊗ … (qubit 0 first).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliString {
    phase: u8,
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(phase: u8, letters: Vec<Pauli>) -> Self {
        PauliString { phase: phase % 4, letters }
    }

    pub fn identity(n: usize) -> Self {
        PauliString::new(0, vec![Pauli::I; n])
    }

    /// Single letter `p` on qubit `q` of an `n`-qubit register.
    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n];
        letters[q] = p;
        PauliString::new(0, letters)
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    /// Exponent k of the overall factor i^k.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn coefficient(&self) -> C64 {
        match self.phase {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    /// +1 or -1 for Hermitian strings, None otherwise.
    pub fn sign(&self) -> Option<f64> {
        match self.phase {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }

    pub fn with_phase(&self, phase: u8) -> Self {
        PauliString::new(phase, self.letters.clone())
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    pub fn letters_string(&self) -> String {
        self.letters.iter().map(|p| p.as_char()).collect()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    pub fn try_mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.num_qubits() != other.num_qubits() {
            return Err(Error::DimensionMismatch { expected: self.num_qubits(), got: other.num_qubits() });
        }
        let mut phase = self.phase + other.phase;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (k, c) = Pauli::product(a, b);
                phase += k;
                c
            })
            .collect();
        Ok(PauliString::new(phase, letters))
    }

    /// Dense matrix; intended for small registers and tests.
    pub fn matrix(&self) -> Matrix {
        let mut m = linalg::identity(1);
        for p in &self.letters {
            m = linalg::kron(&m, &p.matrix());
        }
        m * self.coefficient()
    }

    fn masks(&self) -> (usize, usize, usize) {
        let n = self.letters.len();
        let (mut x, mut z, mut y) = (0usize, 0usize, 0usize);
        for (q, p) in self.letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            let (px, pz) = p.bits();
            if px {
                x |= bit;
            }
            if pz {
                z |= bit;
            }
            if px && pz {
                y |= bit;
            }
        }
        (x, z, y)
    }

    /// P|c⟩ = f(c)|c ⊕ x⟩; returns f(c).
    fn factor(&self, c: usize, zmask: usize, ymask: usize) -> C64 {
        // Y = iXZ: each Y contributes i, each Z-type bit set in c a sign.
        let ny = ymask.count_ones() as u8;
        let minus = (c & zmask).count_ones() % 2 == 1;
        let k = (self.phase + ny + if minus { 2 } else { 0 }) % 4;
        match k {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    /// Non-zero entries column by column: P|c⟩ = value |row⟩, returned as
    /// (row, value) indexed by c.
    pub fn columns(&self) -> Vec<(usize, C64)> {
        let (x, z, y) = self.masks();
        (0..1usize << self.num_qubits()).map(|c| (c ^ x, self.factor(c, z, y))).collect()
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.num_qubits() != self.num_qubits() {
            return Err(Error::DimensionMismatch { expected: self.num_qubits(), got: psi.num_qubits() });
        }
        let (x, z, y) = self.masks();
        let mut out = psi.clone();
        let src = psi.amplitudes();
        for (c, slot) in out.amps_mut().iter_mut().enumerate() {
            // (P ψ)[c] = f(c ⊕ x) ψ[c ⊕ x]
            let from = c ^ x;
            *slot = self.factor(from, z, y) * src[from];
        }
        Ok(out)
    }

    pub fn expectation(&self, psi: &StateVector) -> Result<C64> {
        let p = self.apply(psi)?;
        psi.inner(&p)
    }

    /// Tr(P ρ).
    pub fn expectation_dm(&self, rho: &DensityMatrix) -> Result<C64> {
        if rho.num_qubits() != self.num_qubits() {
            return Err(Error::DimensionMismatch { expected: self.num_qubits(), got: rho.num_qubits() });
        }
        let (x, z, y) = self.masks();
        let m = rho.matrix();
        let mut acc = C64::new(0.0, 0.0);
        for c in 0..rho.dim() {
            // Tr(Pρ) = Σ_c f(c) ρ(c, c ⊕ x)
            acc += self.factor(c, z, y) * m[(c, c ^ x)];
        }
        Ok(acc)
    }

    /// Conjugate by single-qubit Paulis: P ↦ Q P Q† with Q = Π letters of `q`.
    pub fn conjugate_by(&self, q: &PauliString) -> PauliString {
        if self.commutes_with(q) {
            self.clone()
        } else {
            self.with_phase(self.phase + 2)
        }
    }
}

impl Mul for &PauliString {
    type Output = PauliString;
    fn mul(self, rhs: &PauliString) -> PauliString {
        self.try_mul(rhs).expect("Pauli strings of different lengths")
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{}{}", prefix, self.letters_string())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Accepts an optional sign prefix (`+`, `-`, `+i`, `-i`, `i`) followed
    /// by letters from IXYZ.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, rest) = if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (1, r)
        } else {
            (0, s)
        };
        let letters = rest
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::InvalidArgument(format!("bad Pauli letter '{c}' in {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::InvalidArgument(format!("empty Pauli string {s:?}")));
        }
        Ok(PauliString::new(phase, letters))
    }
}

/// Identify a 2×2 matrix as c·P for a Pauli P; returns (i-power of c, P)
/// when c ∈ {±1, ±i}.
pub fn identify_single_pauli(m: &Matrix, tol: f64) -> Option<(u8, Pauli)> {
    for p in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
        let pm = p.matrix();
        // c = Tr(P m)/2
        let c = (&pm * m).trace() / C64::new(2.0, 0.0);
        if (m - &pm * c).norm() > tol {
            continue;
        }
        for (k, val) in [ONE, C64::new(0.0, 1.0), -ONE, C64::new(0.0, -1.0)].iter().enumerate() {
            if (c - val).norm() < tol {
                return Some((k as u8, p));
            }
        }
    }
    None
}
