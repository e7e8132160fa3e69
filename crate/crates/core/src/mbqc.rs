//! Measurement patterns on cluster states with adaptive bases, byproduct
//! tracking and branch aggregation, plus the circuit-model oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{build_graph_state, GraphSpec};
use crate::linalg::{self, Matrix};
use crate::pauli::{Pauli, PauliString};
use crate::state::{DensityMatrix, MeasurementBasis, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PatternMode {
    /// Enumerate every outcome branch with its exact probability.
    Branch,
    /// Draw `shots` runs from a seeded generator; branch weights become
    /// empirical frequencies.
    Sample { seed: u64, shots: usize },
}

/// One outcome branch of a pattern.
#[derive(Debug, Clone)]
pub struct BranchRecord {
    /// Outcome bits in measurement order (0 is the +1 outcome).
    pub outcomes: Vec<u8>,
    pub probability: f64,
    /// Output qubits before the byproduct is undone; None for outcomes that
    /// cannot occur.
    pub residual: Option<StateVector>,
    /// Pauli to apply to the residual.
    pub byproduct: PauliString,
}

#[derive(Debug, Clone)]
pub struct PatternResult {
    pub output: DensityMatrix,
    pub per_branch: Vec<BranchRecord>,
}

/// Σ_b p_b B_b ρ_b B_b†: exactly what perfect feedforward would produce.
pub fn aggregate_branches(branches: &[BranchRecord]) -> Result<DensityMatrix> {
    let total: f64 = branches.iter().map(|b| b.probability).sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidArgument(format!("branch probabilities sum to {total}")));
    }
    let mut parts = Vec::new();
    for b in branches {
        if let Some(r) = &b.residual {
            if b.probability > 0.0 {
                parts.push((b.probability, b.byproduct.apply(r)?.to_density()));
            }
        }
    }
    let norm: f64 = parts.iter().map(|p| p.0).sum();
    for p in &mut parts {
        p.0 /= norm;
    }
    DensityMatrix::mixture(&parts)
}

fn byproduct_1q(x: u8, z: u8) -> PauliString {
    byproduct_on(&[(x, z)])
}

/// ⊗_q X^{x_q} Z^{z_q}.
fn byproduct_on(xz: &[(u8, u8)]) -> PauliString {
    let n = xz.len();
    let mut acc = PauliString::identity(n);
    for (q, &(x, z)) in xz.iter().enumerate() {
        if x & 1 == 1 {
            acc = &acc * &PauliString::single(n, q, Pauli::X);
        }
        if z & 1 == 1 {
            acc = &acc * &PauliString::single(n, q, Pauli::Z);
        }
    }
    acc
}

/// Both outcomes of measuring `qubit` in `basis`.
fn split(psi: &StateVector, qubit: usize, basis: MeasurementBasis) -> Result<[(f64, Option<StateVector>); 2]> {
    Ok([psi.project_qubit(qubit, basis.ket(0))?, psi.project_qubit(qubit, basis.ket(1))?])
}

/// Pick an outcome for a sampled run.
fn draw<R: Rng>(parts: [(f64, Option<StateVector>); 2], rng: &mut R) -> (u8, StateVector) {
    let [(p0, r0), (_, r1)] = parts;
    let u: f64 = rng.random();
    match (r0, r1) {
        (Some(a), Some(b)) => {
            if u < p0 {
                (0, a)
            } else {
                (1, b)
            }
        }
        (Some(a), None) => (0, a),
        (None, Some(b)) => (1, b),
        (None, None) => unreachable!("normalized state has a non-zero branch"),
    }
}

/// One measurement step of a pattern: given the outcomes so far, which
/// qubit of the current residual to measure and in which basis.
type StepFn<'a> = dyn Fn(&[u8]) -> (usize, MeasurementBasis) + 'a;

fn run_steps(
    state: &StateVector,
    steps: usize,
    step: &StepFn,
    byproduct: &dyn Fn(&[u8]) -> PauliString,
    mode: PatternMode,
) -> Result<Vec<BranchRecord>> {
    match mode {
        PatternMode::Branch => {
            let mut out = Vec::new();
            let mut stack = vec![(Vec::<u8>::new(), 1.0f64, Some(state.clone()))];
            while let Some((outcomes, prob, psi)) = stack.pop() {
                if outcomes.len() == steps {
                    out.push(BranchRecord { byproduct: byproduct(&outcomes), outcomes, probability: prob, residual: psi });
                    continue;
                }
                let (q, basis) = step(&outcomes);
                let parts = match &psi {
                    Some(p) => split(p, q, basis)?,
                    None => [(0.0, None), (0.0, None)],
                };
                for (s, (p, r)) in parts.into_iter().enumerate().rev() {
                    let mut o = outcomes.clone();
                    o.push(s as u8);
                    stack.push((o, prob * p, r));
                }
            }
            out.sort_by(|a, b| a.outcomes.cmp(&b.outcomes));
            Ok(out)
        }
        PatternMode::Sample { seed, shots } => {
            if shots == 0 {
                return Err(Error::InvalidArgument("sample mode needs at least one shot".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut tally: BTreeMap<Vec<u8>, (usize, StateVector)> = BTreeMap::new();
            for _ in 0..shots {
                let mut psi = state.clone();
                let mut outcomes = Vec::with_capacity(steps);
                for _ in 0..steps {
                    let (q, basis) = step(&outcomes);
                    let (s, next) = draw(split(&psi, q, basis)?, &mut rng);
                    outcomes.push(s);
                    psi = next;
                }
                tally.entry(outcomes).or_insert((0, psi)).0 += 1;
            }
            Ok(tally
                .into_iter()
                .map(|(outcomes, (count, psi))| BranchRecord {
                    byproduct: byproduct(&outcomes),
                    probability: count as f64 / shots as f64,
                    residual: Some(psi),
                    outcomes,
                })
                .collect())
        }
    }
}

/// Adaptive measurement along a linear cluster of `angles.len() + 1`
/// qubits. An incoming byproduct X^x Z^z flips the sign of the next angle
/// when x = 1; after outcome s the byproduct becomes X^{s⊕z} Z^x. The last
/// qubit is the output, reported in the raw (un-rotated) frame.
pub fn run_chain_pattern(cluster: &StateVector, angles: &[f64], mode: PatternMode) -> Result<PatternResult> {
    if cluster.num_qubits() != angles.len() + 1 {
        return Err(Error::DimensionMismatch { expected: angles.len() + 1, got: cluster.num_qubits() });
    }
    let frame = |outcomes: &[u8]| -> (u8, u8) {
        let (mut x, mut z) = (0u8, 0u8);
        for &s in outcomes {
            let nx = s ^ z;
            z = x;
            x = nx;
        }
        (x, z)
    };
    let step = |outcomes: &[u8]| {
        let (x, _) = frame(outcomes);
        let a = angles[outcomes.len()];
        (0, MeasurementBasis::Equatorial(if x == 1 { -a } else { a }))
    };
    let byproduct = |outcomes: &[u8]| {
        let (x, z) = frame(outcomes);
        byproduct_1q(x, z)
    };
    let per_branch = run_steps(cluster, angles.len(), &step, &byproduct, mode)?;
    let output = aggregate_branches(&per_branch)?;
    Ok(PatternResult { output, per_branch })
}

/// Rotation pattern on the four-qubit linear cluster: qubit 1 in B(α),
/// qubit 2 in B(±β), qubit 3 in B(±γ), output on qubit 4 with byproduct
/// X^{s1+s3} Z^{s2}. The output is reported in the Hadamard readout frame
/// of the output qubit, where zero angles give the identity on |+⟩.
pub fn run_single_qubit_pattern(alpha: f64, beta: f64, gamma: f64, mode: PatternMode) -> Result<PatternResult> {
    let cluster = build_graph_state(&GraphSpec::lc4());
    let mut res = run_chain_pattern(&cluster, &[alpha, beta, gamma], mode)?;
    res.output = res.output.apply_unitary(&linalg::hadamard(), &[0])?;
    Ok(res)
}

/// Two-qubit pattern on the four-qubit linear cluster: qubits 1 and 4 are
/// measured in B(α) and B(β); qubits 2 and 3 carry the output with
/// byproducts X^{s1}Z^{s4} and X^{s4}Z^{s1}.
pub fn run_two_qubit_pattern(alpha: f64, beta: f64, mode: PatternMode) -> Result<PatternResult> {
    let cluster = build_graph_state(&GraphSpec::lc4());
    // after qubit 1 is gone the old qubit 4 sits at index 2
    let step = |outcomes: &[u8]| match outcomes.len() {
        0 => (0, MeasurementBasis::Equatorial(alpha)),
        _ => (2, MeasurementBasis::Equatorial(beta)),
    };
    let byproduct = |o: &[u8]| byproduct_on(&[(o[0], o[1]), (o[1], o[0])]);
    let per_branch = run_steps(&cluster, 2, &step, &byproduct, mode)?;
    let output = aggregate_branches(&per_branch)?;
    Ok(PatternResult { output, per_branch })
}

/// Π_i H P(-a_i), first angle acting first. P(φ) = diag(1, e^{iφ}).
pub fn chain_circuit(angles: &[f64]) -> Matrix {
    let h = linalg::hadamard();
    angles.iter().fold(linalg::identity(2), |acc, &a| &h * linalg::phase(-a) * acc)
}

/// P(-γ) H P(-β) H P(-α), equal to R_z(-γ) R_x(-β) R_z(-α) up to phase;
/// the single-qubit pattern applies it to |+⟩.
pub fn equivalent_circuit_single(alpha: f64, beta: f64, gamma: f64) -> Matrix {
    linalg::hadamard() * chain_circuit(&[alpha, beta, gamma])
}

/// CZ · (H P(-α) ⊗ H P(-β)), applied to |++⟩ by the two-qubit pattern.
pub fn equivalent_circuit_two(alpha: f64, beta: f64) -> Matrix {
    let h = linalg::hadamard();
    let a = &h * linalg::phase(-alpha);
    let b = &h * linalg::phase(-beta);
    linalg::cz() * linalg::kron(&a, &b)
}

pub fn oracle_single_output(alpha: f64, beta: f64, gamma: f64) -> StateVector {
    StateVector::plus(1)
        .apply_unitary(&equivalent_circuit_single(alpha, beta, gamma), &[0])
        .expect("unitary oracle")
}

pub fn oracle_two_output(alpha: f64, beta: f64) -> StateVector {
    StateVector::plus(2)
        .apply_unitary(&equivalent_circuit_two(alpha, beta), &[0, 1])
        .expect("unitary oracle")
}

/// Bloch vector (⟨X⟩, ⟨Y⟩, ⟨Z⟩) of a one-qubit state.
pub fn bloch_vector(rho: &DensityMatrix) -> Result<[f64; 3]> {
    if rho.num_qubits() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: rho.num_qubits() });
    }
    let m = rho.matrix();
    Ok([2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re])
}

/// Remove vertex `v` from a graph state by a Z measurement. Outcome s is
/// fixed by Z^s on each former neighbour; both branches then hold the graph
/// state of the smaller graph.
pub fn delete_vertex_by_z(psi: &StateVector, g: &GraphSpec, v: usize) -> Result<(GraphSpec, Vec<(f64, StateVector)>)> {
    let n = g.num_vertices();
    if psi.num_qubits() != n {
        return Err(Error::DimensionMismatch { expected: n, got: psi.num_qubits() });
    }
    if v >= n {
        return Err(Error::QubitOutOfRange { index: v, num_qubits: n });
    }
    let shift = |u: usize| if u > v { u - 1 } else { u };
    let edges: Vec<_> = g
        .edges()
        .iter()
        .filter(|&&(a, b)| a != v && b != v)
        .map(|&(a, b)| (shift(a), shift(b)))
        .collect();
    let smaller = GraphSpec::new(n - 1, &edges)?;
    let neighbours: Vec<usize> = g.neighbors(v).into_iter().map(shift).collect();
    let mut branches = Vec::new();
    for s in 0..2u8 {
        let (p, r) = psi.project_qubit(v, MeasurementBasis::PauliZ.ket(s))?;
        if let Some(mut r) = r {
            if s == 1 {
                for &u in &neighbours {
                    r.apply_unitary_mut(&linalg::pauli_z(), &[u])?;
                }
            }
            branches.push((p, r));
        }
    }
    Ok((smaller, branches))
}
