//! Measurement-based phase-flip repetition code on the EC_n graph.
//!
//! Layout: A = 0 (input), C_1..C_n = 1..n (codeword), B = n + 1 (output).
//! Steps: measure A to read in the input, let errors act on the codeword,
//! measure every C in the X basis, apply the majority-vote recovery on B.
//!
//! The input and output are expressed in the Hadamard readout frame of the
//! graph: A is projected onto conj(H|ψ⟩) and B is read out as H ρ_B H. In
//! this frame a syndrome failure is a Z on the output, so Z eigenstates pass
//! untouched and the recovery is I or Z.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{build_graph_state, GraphSpec};
use crate::linalg::{self, Matrix};
use crate::state::{Channel, DensityMatrix, MeasurementBasis, StateVector, MAX_QUBITS};

fn c(re: f64, im: f64) -> num_complex::Complex64 {
    num_complex::Complex64::new(re, im)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ECLayout {
    pub n: usize,
}

impl ECLayout {
    pub fn new(n: usize) -> Result<Self> {
        if n.is_multiple_of(2) {
            return Err(Error::EvenCodeLength(n));
        }
        if n + 2 > MAX_QUBITS {
            return Err(Error::TooManyQubits { requested: n + 2, limit: MAX_QUBITS });
        }
        Ok(ECLayout { n })
    }

    pub fn num_qubits(&self) -> usize {
        self.n + 2
    }

    pub fn a(&self) -> usize {
        0
    }

    /// Codeword qubit C_i, 1-based.
    pub fn c(&self, i: usize) -> usize {
        i
    }

    pub fn b(&self) -> usize {
        self.n + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InputState {
    Plus,
    Minus,
    PlusI,
    MinusI,
    Zero,
    One,
}

impl InputState {
    pub const ALL: [InputState; 6] =
        [InputState::Plus, InputState::Minus, InputState::PlusI, InputState::MinusI, InputState::Zero, InputState::One];

    pub fn label(&self) -> &'static str {
        match self {
            InputState::Plus => "+",
            InputState::Minus => "-",
            InputState::PlusI => "+i",
            InputState::MinusI => "-i",
            InputState::Zero => "0",
            InputState::One => "1",
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        InputState::ALL
            .iter()
            .copied()
            .find(|i| i.label() == s.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown input state {s:?}")))
    }

    pub fn ket(&self) -> [num_complex::Complex64; 2] {
        let h = FRAC_1_SQRT_2;
        match self {
            InputState::Plus => [c(h, 0.0), c(h, 0.0)],
            InputState::Minus => [c(h, 0.0), c(-h, 0.0)],
            InputState::PlusI => [c(h, 0.0), c(0.0, h)],
            InputState::MinusI => [c(h, 0.0), c(0.0, -h)],
            InputState::Zero => [c(1.0, 0.0), c(0.0, 0.0)],
            InputState::One => [c(0.0, 0.0), c(1.0, 0.0)],
        }
    }

    pub fn state(&self) -> StateVector {
        StateVector::from_amplitudes(self.ket().to_vec()).unwrap()
    }

    pub fn orthogonal(&self) -> InputState {
        match self {
            InputState::Plus => InputState::Minus,
            InputState::Minus => InputState::Plus,
            InputState::PlusI => InputState::MinusI,
            InputState::MinusI => InputState::PlusI,
            InputState::Zero => InputState::One,
            InputState::One => InputState::Zero,
        }
    }

    /// The Pauli taking the orthogonal state back to this one.
    pub fn fix(&self) -> Matrix {
        match self {
            InputState::Zero | InputState::One => linalg::pauli_x(),
            _ => linalg::pauli_z(),
        }
    }
}

impl fmt::Display for InputState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputSet {
    Four,
    Six,
}

impl InputSet {
    pub fn states(&self) -> &'static [InputState] {
        match self {
            InputSet::Four => &InputState::ALL[..4],
            InputSet::Six => &InputState::ALL[..],
        }
    }

    pub fn from_count(k: usize) -> Result<Self> {
        match k {
            4 => Ok(InputSet::Four),
            6 => Ok(InputSet::Six),
            _ => Err(Error::InvalidArgument(format!("input set must have 4 or 6 states, got {k}"))),
        }
    }

    pub fn len(&self) -> usize {
        self.states().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Which codeword qubits receive errors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorTargets {
    All,
    /// 1-based codeword indices.
    Subset(Vec<usize>),
}

impl ErrorTargets {
    /// `all`, `C1`, `C1,C3`, or bare indices `1,3`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(ErrorTargets::All);
        }
        let mut out = Vec::new();
        for part in s.split(',') {
            let p = part.trim();
            let digits = p.strip_prefix('C').or_else(|| p.strip_prefix('c')).unwrap_or(p);
            let i: usize = digits.parse().map_err(|_| Error::InvalidTarget(p.to_string()))?;
            if i == 0 {
                return Err(Error::InvalidTarget(p.to_string()));
            }
            if out.contains(&i) {
                return Err(Error::InvalidTarget(format!("{p} listed twice")));
            }
            out.push(i);
        }
        out.sort_unstable();
        Ok(ErrorTargets::Subset(out))
    }

    pub fn resolve(&self, n: usize) -> Result<Vec<usize>> {
        match self {
            ErrorTargets::All => Ok((1..=n).collect()),
            ErrorTargets::Subset(v) => {
                if let Some(bad) = v.iter().find(|&&i| i == 0 || i > n) {
                    return Err(Error::InvalidTarget(format!("C{bad}")));
                }
                Ok(v.clone())
            }
        }
    }
}

impl fmt::Display for ErrorTargets {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorTargets::All => f.write_str("all"),
            ErrorTargets::Subset(v) => {
                f.write_str(&v.iter().map(|i| format!("C{i}")).collect::<Vec<_>>().join(","))
            }
        }
    }
}

/// Coherent rotations R_z(θ) = exp(-iθZ/2) on the listed codeword qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSpec {
    /// 1-based codeword indices.
    pub targets: Vec<usize>,
    pub theta: f64,
}

impl ErrorSpec {
    pub fn new(targets: Vec<usize>, theta: f64) -> Self {
        ErrorSpec { targets, theta }
    }

    /// θ = 2 asin(√p).
    pub fn from_probability(targets: Vec<usize>, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
        Ok(ErrorSpec { targets, theta: 2.0 * p.sqrt().asin() })
    }

    /// p = sin²(θ/2).
    pub fn flip_probability(&self) -> f64 {
        (self.theta / 2.0).sin().powi(2)
    }
}

/// How errors are modelled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ErrorModel {
    None,
    /// Coherent Z rotations.
    Coherent(ErrorSpec),
    /// Z flips with probability sin²(θ/2) on each target.
    Incoherent(ErrorSpec),
}

/// When errors act relative to the read-in measurement of A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorTiming {
    BeforeEncode,
    AfterEncode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Recovery {
    Identity,
    Z,
}

/// Majority vote over X outcomes (1 = minus): Z when most outcomes are
/// minus. Even lengths are rejected.
pub fn recovery_for(syndrome: &[u8]) -> Result<Recovery> {
    if syndrome.len().is_multiple_of(2) {
        return Err(Error::EvenCodeLength(syndrome.len()));
    }
    let minus = syndrome.iter().filter(|&&s| s == 1).count();
    Ok(if 2 * minus > syndrome.len() { Recovery::Z } else { Recovery::Identity })
}

/// The CZ graph state of the EC_n graph.
pub fn build_ec_state(n: usize) -> Result<StateVector> {
    ECLayout::new(n)?;
    Ok(build_graph_state(&GraphSpec::ec(n)?))
}

/// The read-in projector for A: conj(H|ψ⟩).
fn read_in_ket(input: InputState) -> [num_complex::Complex64; 2] {
    let k = input.ket();
    let h = FRAC_1_SQRT_2;
    [((k[0] + k[1]) * h).conj(), ((k[0] - k[1]) * h).conj()]
}

/// One branch of the read-in measurement of A.
#[derive(Debug, Clone)]
pub struct EncodeBranch {
    /// 0 when the input itself was encoded, 1 for its orthogonal partner.
    pub outcome: u8,
    pub probability: f64,
    /// State of C_1..C_n, B.
    pub residual: Option<DensityMatrix>,
}

/// Measure A in the basis {conj(H|ψ⟩), conj(H|ψ⊥⟩)}; both branches kept.
pub fn encode_input(state: &DensityMatrix, input: InputState) -> Result<Vec<EncodeBranch>> {
    let mut out = Vec::with_capacity(2);
    for (outcome, which) in [(0u8, input), (1u8, input.orthogonal())] {
        let (probability, residual) = state.project_qubit(0, read_in_ket(which))?;
        out.push(EncodeBranch { outcome, probability, residual });
    }
    Ok(out)
}

/// Apply the error model to the codeword qubits. `has_a` tells whether A is
/// still part of the register (so C_i sits at index i rather than i - 1).
pub fn inject_errors(state: &DensityMatrix, n: usize, has_a: bool, model: &ErrorModel) -> Result<DensityMatrix> {
    let expected = if has_a { n + 2 } else { n + 1 };
    if state.num_qubits() != expected {
        return Err(Error::DimensionMismatch { expected, got: state.num_qubits() });
    }
    let spec = match model {
        ErrorModel::None => return Ok(state.clone()),
        ErrorModel::Coherent(s) | ErrorModel::Incoherent(s) => s,
    };
    let mut out = state.clone();
    for &t in &spec.targets {
        if t == 0 || t > n {
            return Err(Error::InvalidTarget(format!("C{t}")));
        }
        let q = if has_a { t } else { t - 1 };
        out = match model {
            ErrorModel::Coherent(_) => out.apply_unitary(&linalg::rz(spec.theta), &[q])?,
            _ => out.apply_channel(&Channel::PhaseFlip { p: spec.flip_probability(), qubit: q })?,
        };
    }
    Ok(out)
}

/// Coherent errors on a pure state.
pub fn inject_errors_pure(state: &StateVector, n: usize, has_a: bool, spec: &ErrorSpec) -> Result<StateVector> {
    let mut out = state.clone();
    for &t in &spec.targets {
        if t == 0 || t > n {
            return Err(Error::InvalidTarget(format!("C{t}")));
        }
        let q = if has_a { t } else { t - 1 };
        out.apply_unitary_mut(&linalg::rz(spec.theta), &[q])?;
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SyndromeBranch {
    /// X outcomes of C_1..C_n (1 = minus).
    pub syndrome: Vec<u8>,
    pub probability: f64,
    pub recovery: Recovery,
}

/// Measure every codeword qubit in X, apply the majority recovery to B and
/// aggregate. Input: state of C_1..C_n, B. Output: B in the readout frame.
pub fn decode_and_recover(state: &DensityMatrix, n: usize) -> Result<(Vec<SyndromeBranch>, DensityMatrix)> {
    if n.is_multiple_of(2) {
        return Err(Error::EvenCodeLength(n));
    }
    if state.num_qubits() != n + 1 {
        return Err(Error::DimensionMismatch { expected: n + 1, got: state.num_qubits() });
    }
    let mut branches = Vec::new();
    let mut acc = Matrix::zeros(2, 2);
    let mut stack = vec![(Vec::<u8>::new(), 1.0f64, state.clone())];
    while let Some((syn, prob, rho)) = stack.pop() {
        if syn.len() == n {
            let recovery = recovery_for(&syn)?;
            let mut b = rho.apply_unitary(&linalg::hadamard(), &[0])?;
            if recovery == Recovery::Z {
                b = b.apply_unitary(&linalg::pauli_z(), &[0])?;
            }
            acc += b.matrix() * c(prob, 0.0);
            branches.push(SyndromeBranch { syndrome: syn, probability: prob, recovery });
            continue;
        }
        for s in 0..2u8 {
            let (p, r) = rho.project_qubit(0, MeasurementBasis::PauliX.ket(s))?;
            let mut next = syn.clone();
            next.push(s);
            // impossible syndromes are dropped
            if let Some(r) = r {
                stack.push((next, prob * p, r));
            }
        }
    }
    branches.sort_by(|a, b| a.syndrome.cmp(&b.syndrome));
    let out = DensityMatrix::from_matrix_unchecked(acc)?;
    Ok((branches, out))
}

/// Result of the full protocol for one input.
#[derive(Debug, Clone)]
pub struct ProtocolOutcome {
    pub output: DensityMatrix,
    pub fidelity: f64,
    /// (read-in outcome, read-in probability, syndrome branches)
    pub branches: Vec<(u8, f64, Vec<SyndromeBranch>)>,
}

pub fn run_protocol(
    resource: &DensityMatrix,
    n: usize,
    input: InputState,
    errors: &ErrorModel,
    timing: ErrorTiming,
) -> Result<ProtocolOutcome> {
    let layout = ECLayout::new(n)?;
    if resource.num_qubits() != layout.num_qubits() {
        return Err(Error::DimensionMismatch { expected: layout.num_qubits(), got: resource.num_qubits() });
    }
    let start = if timing == ErrorTiming::BeforeEncode {
        inject_errors(resource, n, true, errors)?
    } else {
        resource.clone()
    };
    let mut acc = Matrix::zeros(2, 2);
    let mut branches = Vec::new();
    for enc in encode_input(&start, input)? {
        let Some(residual) = enc.residual else {
            branches.push((enc.outcome, 0.0, Vec::new()));
            continue;
        };
        let residual = if timing == ErrorTiming::AfterEncode {
            inject_errors(&residual, n, false, errors)?
        } else {
            residual
        };
        let (syn, mut out) = decode_and_recover(&residual, n)?;
        if enc.outcome == 1 {
            out = out.apply_unitary(&input.fix(), &[0])?;
        }
        acc += out.matrix() * c(enc.probability, 0.0);
        branches.push((enc.outcome, enc.probability, syn));
    }
    let output = DensityMatrix::from_matrix_unchecked(acc)?;
    let fidelity = output.fidelity(&input.state())?;
    Ok(ProtocolOutcome { output, fidelity, branches })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ATFPoint {
    pub p: f64,
    /// (input label, fidelity) in input-set order.
    pub fidelities: Vec<(InputState, f64)>,
    pub average: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ATFReport {
    pub n: usize,
    pub input_set: InputSet,
    pub targets: ErrorTargets,
    pub points: Vec<ATFPoint>,
}

/// Average output fidelity at flip probability p with coherent errors on the
/// chosen targets.
pub fn atf(n: usize, p: f64, targets: &ErrorTargets, input_set: InputSet) -> Result<ATFPoint> {
    let resource = build_ec_state(n)?.to_density();
    atf_with_resource(&resource, n, p, targets, input_set)
}

fn atf_with_resource(
    resource: &DensityMatrix,
    n: usize,
    p: f64,
    targets: &ErrorTargets,
    input_set: InputSet,
) -> Result<ATFPoint> {
    let spec = ErrorSpec::from_probability(targets.resolve(n)?, p)?;
    let model = ErrorModel::Coherent(spec);
    let fidelities = input_set
        .states()
        .iter()
        .map(|&i| Ok((i, run_protocol(resource, n, i, &model, ErrorTiming::AfterEncode)?.fidelity)))
        .collect::<Result<Vec<_>>>()?;
    let average = fidelities.iter().map(|f| f.1).sum::<f64>() / fidelities.len() as f64;
    Ok(ATFPoint { p, fidelities, average })
}

/// ATF over a grid of p values, evaluated in parallel; points come back in
/// grid order.
pub fn atf_sweep(n: usize, grid: &[f64], targets: &ErrorTargets, input_set: InputSet) -> Result<ATFReport> {
    let resource = build_ec_state(n)?.to_density();
    let points = grid
        .par_iter()
        .map(|&p| atf_with_resource(&resource, n, p, targets, input_set))
        .collect::<Result<Vec<_>>>()?;
    Ok(ATFReport { n, input_set, targets: targets.clone(), points })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Probability that at most (n-1)/2 of the `t` targeted qubits flip.
pub fn ideal_atf_curve_targets(n: usize, t: usize, p: f64, input_set: InputSet) -> Result<f64> {
    if n.is_multiple_of(2) {
        return Err(Error::EvenCodeLength(n));
    }
    if t > n {
        return Err(Error::InvalidArgument(format!("{t} targets exceed code length {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let f4: f64 = (0..=((n - 1) / 2).min(t))
        .map(|k| binomial(t, k) * p.powi(k as i32) * (1.0 - p).powi((t - k) as i32))
        .sum();
    Ok(match input_set {
        InputSet::Four => f4,
        InputSet::Six => (4.0 * f4 + 2.0) / 6.0,
    })
}

/// Σ_{k≤(n-1)/2} C(n,k) p^k (1-p)^{n-k}; the six-state set mixes in two
/// unit-fidelity inputs: (4F + 2)/6.
pub fn ideal_atf_curve(n: usize, p: f64, input_set: InputSet) -> Result<f64> {
    ideal_atf_curve_targets(n, n, p, input_set)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseKind {
    Dephase,
    Depolarize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseScope {
    AllQubits,
    Codeword,
}

/// ATF (four inputs) at p = 0 when every qubit in `scope` of the resource
/// state first passes through the channel.
pub fn noise_robustness_study(n: usize, kind: NoiseKind, strength: f64, scope: NoiseScope) -> Result<f64> {
    let layout = ECLayout::new(n)?;
    let mut rho = build_ec_state(n)?.to_density();
    let qubits: Vec<usize> = match scope {
        NoiseScope::AllQubits => (0..layout.num_qubits()).collect(),
        NoiseScope::Codeword => (1..=n).collect(),
    };
    for q in qubits {
        let ch = match kind {
            NoiseKind::Dephase => Channel::Dephase { p: strength, qubit: q },
            NoiseKind::Depolarize => Channel::Depolarize { p: strength, qubit: q },
        };
        rho = rho.apply_channel(&ch)?;
    }
    let set = InputSet::Four;
    let mut total = 0.0;
    for &i in set.states() {
        total += run_protocol(&rho, n, i, &ErrorModel::None, ErrorTiming::AfterEncode)?.fidelity;
    }
    Ok(total / set.len() as f64)
}
