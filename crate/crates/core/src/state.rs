//! Pure and mixed n-qubit states.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, ONE, ZERO};

/// Largest register the dense backend accepts.
pub const MAX_QUBITS: usize = 12;

pub const NORM_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;

/// Insert `bit` into `rest` at qubit position `q` (MSB convention) of an
/// `n`-qubit index.
fn insert_bit(rest: usize, q: usize, bit: usize, n: usize) -> usize {
    let pos = n - 1 - q;
    let high = (rest >> pos) << (pos + 1);
    let low = rest & ((1usize << pos) - 1);
    high | (bit << pos) | low
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// |0…0⟩ on `n` qubits.
    pub fn zero(n: usize) -> Self {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Self {
        assert!(n <= MAX_QUBITS, "register too large");
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = ONE;
        StateVector { num_qubits: n, amps }
    }

    /// |+⟩^⊗n.
    pub fn plus(n: usize) -> Self {
        let a = C64::new((1.0 / (1u64 << n) as f64).sqrt(), 0.0);
        StateVector { num_qubits: n, amps: vec![a; 1 << n] }
    }

    /// Normalizes the given amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude vector length {len} is not a power of two"
            )));
        }
        let n = len.trailing_zeros() as usize;
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits { requested: n, limit: MAX_QUBITS });
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(Error::InvalidArgument("zero vector is not a state".into()));
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        Ok(StateVector { num_qubits: n, amps })
    }

    /// Tensor product of single-qubit kets, qubit 0 first.
    pub fn product(kets: &[[C64; 2]]) -> Result<Self> {
        let mut amps = vec![ONE];
        for k in kets {
            amps = amps.iter().flat_map(|&a| [a * k[0], a * k[1]]).collect();
        }
        Self::from_amplitudes(amps)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let amps = self
            .amps
            .iter()
            .flat_map(|&a| other.amps.iter().map(move |&b| a * b))
            .collect();
        StateVector { num_qubits: self.num_qubits + other.num_qubits, amps }
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.amps.len() != other.amps.len() {
            return Err(Error::DimensionMismatch { expected: self.amps.len(), got: other.amps.len() });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Apply `u` to `targets` (targets[0] is the most significant qubit of u).
    pub fn apply_unitary(&self, u: &Matrix, targets: &[usize]) -> Result<StateVector> {
        let mut out = self.clone();
        out.apply_unitary_mut(u, targets)?;
        Ok(out)
    }

    pub fn apply_unitary_mut(&mut self, u: &Matrix, targets: &[usize]) -> Result<()> {
        linalg::check_targets(targets, self.num_qubits)?;
        if targets.is_empty() || u.nrows() != 1 << targets.len() || u.ncols() != u.nrows() {
            return Err(Error::DimensionMismatch { expected: 1 << targets.len(), got: u.nrows() });
        }
        let dev = linalg::unitarity_deviation(u);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        linalg::apply_in_place(&mut self.amps, self.num_qubits, u, targets);
        self.renormalize();
        Ok(())
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub(crate) fn renormalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    /// Contract qubit `q` with ⟨phi|. Returns the branch probability and the
    /// normalized state of the remaining qubits (None when the probability
    /// vanishes).
    pub fn project_qubit(&self, q: usize, phi: [C64; 2]) -> Result<(f64, Option<StateVector>)> {
        linalg::check_targets(&[q], self.num_qubits)?;
        let n = self.num_qubits;
        let mut rest = vec![ZERO; 1 << (n - 1)];
        for (r, slot) in rest.iter_mut().enumerate() {
            let i0 = insert_bit(r, q, 0, n);
            let i1 = insert_bit(r, q, 1, n);
            *slot = phi[0].conj() * self.amps[i0] + phi[1].conj() * self.amps[i1];
        }
        let prob: f64 = rest.iter().map(|a| a.norm_sqr()).sum();
        if prob <= 1e-30 {
            return Ok((0.0, None));
        }
        let s = prob.sqrt();
        let amps = rest.into_iter().map(|a| a / s).collect();
        Ok((prob, Some(StateVector { num_qubits: n - 1, amps })))
    }

    /// Projective measurement of one qubit. Branch mode returns both outcomes
    /// (zero-probability branches carry no residual); sample mode returns one
    /// branch drawn with the given seed.
    pub fn measure(&self, qubit: usize, basis: MeasurementBasis, mode: MeasureMode) -> Result<Vec<MeasurementBranch>> {
        let mut branches = Vec::with_capacity(2);
        for s in 0..2u8 {
            let (probability, residual) = self.project_qubit(qubit, basis.ket(s))?;
            branches.push(MeasurementBranch { outcome: s, probability, residual });
        }
        match mode {
            MeasureMode::Branch => Ok(branches),
            MeasureMode::Sample { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let pick = sample_branch(&branches, &mut rng);
                Ok(vec![branches.swap_remove(pick)])
            }
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

pub(crate) fn sample_branch<R: Rng>(branches: &[MeasurementBranch], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    if u < branches[0].probability || branches[1].probability == 0.0 {
        0
    } else {
        1
    }
}

/// One-qubit measurement bases. Outcome 0 is the +1 eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MeasurementBasis {
    /// {(|0⟩ ± e^{iα}|1⟩)/√2}
    Equatorial(f64),
    PauliX,
    PauliY,
    PauliZ,
}

impl MeasurementBasis {
    pub fn ket(&self, outcome: u8) -> [C64; 2] {
        let h = FRAC_1_SQRT_2;
        let sign = if outcome == 0 { 1.0 } else { -1.0 };
        match *self {
            MeasurementBasis::Equatorial(alpha) => {
                [C64::new(h, 0.0), C64::from_polar(sign * h, alpha)]
            }
            MeasurementBasis::PauliX => MeasurementBasis::Equatorial(0.0).ket(outcome),
            MeasurementBasis::PauliY => {
                MeasurementBasis::Equatorial(std::f64::consts::FRAC_PI_2).ket(outcome)
            }
            MeasurementBasis::PauliZ => {
                if outcome == 0 {
                    [ONE, ZERO]
                } else {
                    [ZERO, ONE]
                }
            }
        }
    }

    /// Unitary taking the outcome-s basis ket to |s⟩.
    pub fn to_computational(&self) -> Matrix {
        let k0 = self.ket(0);
        let k1 = self.ket(1);
        DMatrix::from_row_slice(2, 2, &[k0[0].conj(), k0[1].conj(), k1[0].conj(), k1[1].conj()])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasureMode {
    Branch,
    Sample { seed: u64 },
}

#[derive(Debug, Clone)]
pub struct MeasurementBranch {
    pub outcome: u8,
    pub probability: f64,
    /// State of the unmeasured qubits, absent for zero-probability outcomes.
    pub residual: Option<StateVector>,
}

/// Single-qubit noise channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Channel {
    /// Off-diagonal elements shrink by (1 - p).
    Dephase { p: f64, qubit: usize },
    /// ρ → (1 - p) ρ + p I/2.
    Depolarize { p: f64, qubit: usize },
    /// Z applied with probability p.
    PhaseFlip { p: f64, qubit: usize },
}

impl Channel {
    fn parts(&self) -> (f64, usize) {
        match *self {
            Channel::Dephase { p, qubit } | Channel::Depolarize { p, qubit } | Channel::PhaseFlip { p, qubit } => {
                (p, qubit)
            }
        }
    }

    pub fn kraus(&self) -> Result<Vec<Matrix>> {
        let (p, _) = self.parts();
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(Error::InvalidProbability(p));
        }
        let scale = |m: Matrix, w: f64| m * C64::new(w.sqrt(), 0.0);
        Ok(match self {
            Channel::Dephase { .. } => {
                vec![scale(linalg::identity(2), 1.0 - p / 2.0), scale(linalg::pauli_z(), p / 2.0)]
            }
            Channel::Depolarize { .. } => vec![
                scale(linalg::identity(2), 1.0 - 3.0 * p / 4.0),
                scale(linalg::pauli_x(), p / 4.0),
                scale(linalg::pauli_y(), p / 4.0),
                scale(linalg::pauli_z(), p / 4.0),
            ],
            Channel::PhaseFlip { .. } => {
                vec![scale(linalg::identity(2), 1.0 - p), scale(linalg::pauli_z(), p)]
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: Matrix,
}

impl DensityMatrix {
    /// Validated constructor: Hermitian, unit trace, positive semidefinite.
    pub fn new(matrix: Matrix) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(matrix)?;
        rho.check_physical()?;
        Ok(rho)
    }

    pub fn from_matrix_unchecked(matrix: Matrix) -> Result<Self> {
        let d = matrix.nrows();
        if d == 0 || !d.is_power_of_two() || matrix.ncols() != d {
            return Err(Error::InvalidArgument(format!("{}x{} is not a qubit density matrix", d, matrix.ncols())));
        }
        Ok(DensityMatrix { num_qubits: d.trailing_zeros() as usize, matrix })
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        DensityMatrix { num_qubits: psi.num_qubits(), matrix: &v * v.adjoint() }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let d = 1usize << n;
        DensityMatrix { num_qubits: n, matrix: linalg::identity(d) / C64::new(d as f64, 0.0) }
    }

    /// Σ w_i ρ_i; weights must be non-negative and sum to one.
    pub fn mixture(parts: &[(f64, DensityMatrix)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let mut m = DMatrix::zeros(first.1.dim(), first.1.dim());
        let mut total = 0.0;
        for (w, rho) in parts {
            if rho.dim() != first.1.dim() {
                return Err(Error::DimensionMismatch { expected: first.1.dim(), got: rho.dim() });
            }
            if *w < 0.0 {
                return Err(Error::InvalidProbability(*w));
            }
            total += w;
            m += &rho.matrix * C64::new(*w, 0.0);
        }
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidArgument(format!("mixture weights sum to {total}")));
        }
        Ok(DensityMatrix { num_qubits: first.1.num_qubits, matrix: m })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn check_physical(&self) -> Result<()> {
        let h = self.hermiticity_deviation();
        if h > HERMITIAN_TOL {
            return Err(Error::NotPhysical(format!("not Hermitian (deviation {h:.3e})")));
        }
        let t = self.trace();
        if (t - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotPhysical(format!("trace {t}")));
        }
        let m = self.min_eigenvalue();
        if m < -PSD_TOL {
            return Err(Error::NotPhysical(format!("negative eigenvalue {m:.3e}")));
        }
        Ok(())
    }

    pub fn is_physical(&self) -> bool {
        self.check_physical().is_ok()
    }

    /// U ρ U† on `targets`.
    pub fn apply_unitary(&self, u: &Matrix, targets: &[usize]) -> Result<DensityMatrix> {
        linalg::check_targets(targets, self.num_qubits)?;
        if targets.is_empty() || u.nrows() != 1 << targets.len() || u.ncols() != u.nrows() {
            return Err(Error::DimensionMismatch { expected: 1 << targets.len(), got: u.nrows() });
        }
        let dev = linalg::unitarity_deviation(u);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        let mut out = self.clone();
        out.sandwich_in_place(u, targets);
        Ok(out)
    }

    /// M ρ M† without any checks (M need not be unitary).
    pub(crate) fn sandwich_in_place(&mut self, m: &Matrix, targets: &[usize]) {
        let n = self.num_qubits;
        // Column-major storage: flat index = col * d + row, so flat qubits
        // 0..n address the column (bra) and n..2n the row (ket).
        let ket: Vec<usize> = targets.iter().map(|t| t + n).collect();
        let conj = m.map(|z| z.conj());
        let data = self.matrix.as_mut_slice();
        linalg::apply_in_place(data, 2 * n, m, &ket);
        linalg::apply_in_place(data, 2 * n, &conj, targets);
    }

    pub(crate) fn apply_kraus(&self, ops: &[Matrix], targets: &[usize]) -> DensityMatrix {
        let mut acc = DMatrix::zeros(self.dim(), self.dim());
        for k in ops {
            let mut part = self.clone();
            part.sandwich_in_place(k, targets);
            acc += part.matrix;
        }
        DensityMatrix { num_qubits: self.num_qubits, matrix: acc }
    }

    pub fn apply_channel(&self, channel: &Channel) -> Result<DensityMatrix> {
        let (_, q) = channel.parts();
        linalg::check_targets(&[q], self.num_qubits)?;
        let ops = channel.kraus()?;
        Ok(self.apply_kraus(&ops, &[q]))
    }

    /// ⟨ψ|ρ|ψ⟩.
    pub fn fidelity(&self, psi: &StateVector) -> Result<f64> {
        if psi.amplitudes().len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: psi.amplitudes().len() });
        }
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        let f = (v.adjoint() * &self.matrix * &v)[(0, 0)];
        Ok(f.re.clamp(0.0, 1.0))
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Tr(Mρ) for a full-register operator.
    pub fn expectation(&self, m: &Matrix) -> Result<C64> {
        if m.nrows() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: m.nrows() });
        }
        Ok((m * &self.matrix).trace())
    }

    /// Diagonal of ρ in the computational basis.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re.max(0.0)).collect()
    }

    /// Reduced state on `keep`, ordered as listed.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::InvalidArgument("partial trace must keep at least one qubit".into()));
        }
        linalg::check_targets(keep, self.num_qubits)?;
        let n = self.num_qubits;
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let index = |k: usize, t: usize| -> usize {
            let mut full = 0usize;
            for (i, &q) in keep.iter().enumerate() {
                let bit = (k >> (keep.len() - 1 - i)) & 1;
                full |= bit << (n - 1 - q);
            }
            for (i, &q) in traced.iter().enumerate() {
                let bit = (t >> (traced.len() - 1 - i)) & 1;
                full |= bit << (n - 1 - q);
            }
            full
        };
        let dk = 1usize << keep.len();
        let dt = 1usize << traced.len();
        let mut out = DMatrix::zeros(dk, dk);
        for r in 0..dk {
            for c in 0..dk {
                let mut acc = ZERO;
                for t in 0..dt {
                    acc += self.matrix[(index(r, t), index(c, t))];
                }
                out[(r, c)] = acc;
            }
        }
        Ok(DensityMatrix { num_qubits: keep.len(), matrix: out })
    }

    /// Squared Wootters concurrence of a two-qubit state.
    pub fn tangle(&self) -> Result<f64> {
        if self.num_qubits != 2 {
            return Err(Error::DimensionMismatch { expected: 4, got: self.dim() });
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::NotPhysical(format!("negative eigenvalue {min:.3e}")));
        }
        let yy = linalg::kron(&linalg::pauli_y(), &linalg::pauli_y());
        let tilde = &yy * self.matrix.map(|z| z.conj()) * &yy;
        let sqrt_rho = hermitian_sqrt(&self.matrix);
        let m = &sqrt_rho * tilde * &sqrt_rho;
        let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let mut lambdas: Vec<f64> = m.symmetric_eigenvalues().iter().map(|&e| e.max(0.0).sqrt()).collect();
        lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let c = (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0);
        Ok((c * c).min(1.0))
    }

    /// Contract qubit `q` with the projector |phi⟩⟨phi|. Returns the branch
    /// probability and normalized residual on the other qubits.
    pub fn project_qubit(&self, q: usize, phi: [C64; 2]) -> Result<(f64, Option<DensityMatrix>)> {
        linalg::check_targets(&[q], self.num_qubits)?;
        let n = self.num_qubits;
        let dr = 1usize << (n - 1);
        let mut out = DMatrix::zeros(dr, dr);
        for c in 0..dr {
            let c0 = insert_bit(c, q, 0, n);
            let c1 = insert_bit(c, q, 1, n);
            for r in 0..dr {
                let r0 = insert_bit(r, q, 0, n);
                let r1 = insert_bit(r, q, 1, n);
                let m = &self.matrix;
                out[(r, c)] = phi[0].conj() * (m[(r0, c0)] * phi[0] + m[(r0, c1)] * phi[1])
                    + phi[1].conj() * (m[(r1, c0)] * phi[0] + m[(r1, c1)] * phi[1]);
            }
        }
        let prob = (0..dr).map(|i| out[(i, i)].re).sum::<f64>();
        if prob <= 1e-30 {
            return Ok((0.0, None));
        }
        out /= C64::new(prob, 0.0);
        Ok((prob, Some(DensityMatrix { num_qubits: n - 1, matrix: out })))
    }
}

/// Principal square root of a Hermitian PSD matrix (negative eigenvalues
/// are clipped).
pub(crate) fn hermitian_sqrt(m: &Matrix) -> Matrix {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let d = eig.eigenvalues.map(|e| C64::new(e.max(0.0).sqrt(), 0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.adjoint()
}
