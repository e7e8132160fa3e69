//! Trapped-ion pulse primitives, the graph-state pulse compiler and its
//! simulator.
//!
//! Three tools are modelled: the global Mølmer–Sørensen interaction
//! exp(-iθ Σ_{a<b} X_a X_b) over the non-hidden ions, addressed AC-Stark
//! rotations exp(-iθ Z_k / 2), and hiding pulses that take an ion out of the
//! collective interaction. A collective carrier rotation exp(-iθ Σ X_k / 2)
//! is also available.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};
use std::fmt::Write as _;

use crate::correction::CorrectionTable;
use crate::error::{Error, Result};
use crate::graph::{build_graph_state, GraphFamily, GraphSpec};
use crate::linalg::{self, Matrix, ZERO};
use crate::state::{StateVector, MAX_QUBITS};

/// Which ions a collective pulse acts on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Active {
    /// Every ion that is not hidden at that point of the sequence.
    All,
    Qubits(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PulsePrimitive {
    Ms { theta: f64, active: Active },
    ZRot { qubit: usize, theta: f64 },
    Hide(usize),
    Unhide(usize),
    XAll { theta: f64, active: Active },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub num_qubits: usize,
    pub primitives: Vec<PulsePrimitive>,
}

/// Physical knobs of the MS interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Single-ion Lamb–Dicke parameter.
    pub eta1: f64,
    /// Rabi angular frequency.
    pub omega: f64,
    /// Detuning angular frequency.
    pub delta: f64,
    pub n_ions: usize,
}

/// θ = π η² Ω² / δ² with η = η1 / √n.
pub fn theta_from_physics(p: &PhysicalParams) -> Result<f64> {
    if !(p.eta1 > 0.0 && p.omega > 0.0 && p.delta > 0.0 && p.n_ions > 0) {
        return Err(Error::InvalidArgument("physical parameters must be positive".into()));
    }
    let eta = p.eta1 / (p.n_ions as f64).sqrt();
    Ok(PI * eta * eta * p.omega * p.omega / (p.delta * p.delta))
}

fn validate_set(active: &[usize], n: usize) -> Result<()> {
    linalg::check_targets(active, n)
}

/// Apply exp(-iθ Σ_{a<b∈active} X_a X_b) in place: rotate the active ions to
/// the Z basis, where the coupling is the diagonal phase exp(-iθ(S² - m)/2)
/// with S the total Z eigenvalue, and rotate back.
fn apply_ms_in_place(state: &mut StateVector, theta: f64, active: &[usize]) {
    let n = state.num_qubits();
    let h = linalg::hadamard();
    for &q in active {
        linalg::apply_in_place(state.amps_mut(), n, &h, &[q]);
    }
    let m = active.len() as i64;
    let mask: usize = active.iter().map(|&q| 1usize << (n - 1 - q)).sum();
    for (i, a) in state.amps_mut().iter_mut().enumerate() {
        let ones = (i & mask).count_ones() as i64;
        let s = m - 2 * ones;
        *a *= C64::from_polar(1.0, -theta * ((s * s - m) as f64) / 2.0);
    }
    for &q in active {
        linalg::apply_in_place(state.amps_mut(), n, &h, &[q]);
    }
}

/// Dense MS unitary on an `n`-qubit register (identity on inactive ions).
pub fn ms_unitary(theta: f64, active: &[usize], n: usize) -> Result<Matrix> {
    if active.len() < 2 {
        return Err(Error::Pulse(format!("MS needs at least two active ions, got {}", active.len())));
    }
    validate_set(active, n)?;
    if n > MAX_QUBITS {
        return Err(Error::TooManyQubits { requested: n, limit: MAX_QUBITS });
    }
    let d = 1usize << n;
    let mut u = Matrix::zeros(d, d);
    for c in 0..d {
        let mut col = StateVector::basis(n, c);
        apply_ms_in_place(&mut col, theta, active);
        for (r, a) in col.amplitudes().iter().enumerate() {
            u[(r, c)] = *a;
        }
    }
    Ok(u)
}

fn apply_xall_in_place(state: &mut StateVector, theta: f64, active: &[usize]) {
    let n = state.num_qubits();
    let r = linalg::rx(theta);
    for &q in active {
        linalg::apply_in_place(state.amps_mut(), n, &r, &[q]);
    }
}

impl PulseSequence {
    pub fn new(num_qubits: usize) -> Self {
        PulseSequence { num_qubits, primitives: Vec::new() }
    }

    pub fn push(&mut self, p: PulsePrimitive) -> &mut Self {
        self.primitives.push(p);
        self
    }

    pub fn extend(&mut self, other: &PulseSequence) -> Result<&mut Self> {
        if other.num_qubits != self.num_qubits {
            return Err(Error::DimensionMismatch { expected: self.num_qubits, got: other.num_qubits });
        }
        self.primitives.extend(other.primitives.iter().cloned());
        Ok(self)
    }

    pub fn ms(&mut self, theta: f64) -> &mut Self {
        self.push(PulsePrimitive::Ms { theta, active: Active::All })
    }

    pub fn z(&mut self, qubit: usize, theta: f64) -> &mut Self {
        self.push(PulsePrimitive::ZRot { qubit, theta })
    }

    pub fn len(&self) -> usize {
        self.primitives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    /// Walk the sequence, resolving every collective pulse to an explicit ion
    /// list and checking the hiding rules.
    fn resolve(&self) -> Result<Vec<Resolved>> {
        let n = self.num_qubits;
        let mut hidden = vec![false; n];
        let mut out = Vec::with_capacity(self.primitives.len());
        let check = |q: usize| -> Result<()> {
            if q >= n {
                Err(Error::QubitOutOfRange { index: q, num_qubits: n })
            } else {
                Ok(())
            }
        };
        for (step, p) in self.primitives.iter().enumerate() {
            let set = |active: &Active, hidden: &[bool]| -> Result<Vec<usize>> {
                match active {
                    Active::All => Ok((0..n).filter(|&q| !hidden[q]).collect()),
                    Active::Qubits(qs) => {
                        validate_set(qs, n)?;
                        if let Some(&q) = qs.iter().find(|&&q| hidden[q]) {
                            return Err(Error::Pulse(format!("step {step}: pulse addresses hidden qubit {q}")));
                        }
                        Ok(qs.clone())
                    }
                }
            };
            match p {
                PulsePrimitive::Ms { theta, active } => {
                    let qs = set(active, &hidden)?;
                    if qs.len() < 2 {
                        return Err(Error::Pulse(format!("step {step}: MS needs two active ions")));
                    }
                    out.push(Resolved::Ms(*theta, qs));
                }
                PulsePrimitive::XAll { theta, active } => {
                    out.push(Resolved::X(*theta, set(active, &hidden)?));
                }
                PulsePrimitive::ZRot { qubit, theta } => {
                    check(*qubit)?;
                    if hidden[*qubit] {
                        return Err(Error::Pulse(format!("step {step}: Z rotation on hidden qubit {qubit}")));
                    }
                    out.push(Resolved::Z(*qubit, *theta));
                }
                PulsePrimitive::Hide(q) => {
                    check(*q)?;
                    if hidden[*q] {
                        return Err(Error::Pulse(format!("step {step}: qubit {q} hidden twice")));
                    }
                    hidden[*q] = true;
                }
                PulsePrimitive::Unhide(q) => {
                    check(*q)?;
                    if !hidden[*q] {
                        return Err(Error::Pulse(format!("step {step}: UNHIDE of visible qubit {q}")));
                    }
                    hidden[*q] = false;
                }
            }
        }
        if let Some(q) = hidden.iter().position(|&h| h) {
            return Err(Error::Pulse(format!("qubit {q} still hidden at end of sequence")));
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        self.resolve().map(|_| ())
    }

    pub fn simulate(&self, initial: &StateVector) -> Result<StateVector> {
        if initial.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch { expected: self.num_qubits, got: initial.num_qubits() });
        }
        let mut state = initial.clone();
        for r in self.resolve()? {
            match r {
                Resolved::Ms(theta, qs) => apply_ms_in_place(&mut state, theta, &qs),
                Resolved::X(theta, qs) => apply_xall_in_place(&mut state, theta, &qs),
                Resolved::Z(q, theta) => linalg::apply_in_place(state.amps_mut(), self.num_qubits, &linalg::rz(theta), &[q]),
            }
        }
        state.renormalize();
        Ok(state)
    }

    /// Simulate from |1⟩^⊗n.
    pub fn run(&self) -> Result<StateVector> {
        self.simulate(&all_ones(self.num_qubits))
    }

    /// Equivalent sequence without hiding: every collective pulse gets the
    /// explicit list of ions that were visible at that point.
    pub fn without_hiding(&self) -> Result<PulseSequence> {
        let primitives = self
            .resolve()?
            .into_iter()
            .map(|r| match r {
                Resolved::Ms(theta, qs) => PulsePrimitive::Ms { theta, active: Active::Qubits(qs) },
                Resolved::X(theta, qs) => PulsePrimitive::XAll { theta, active: Active::Qubits(qs) },
                Resolved::Z(qubit, theta) => PulsePrimitive::ZRot { qubit, theta },
            })
            .collect();
        Ok(PulseSequence { num_qubits: self.num_qubits, primitives })
    }

    /// Line-oriented text form. Angles use Rust's shortest round-trip float
    /// formatting, so `parse(to_text(s)) == s` exactly.
    pub fn to_text(&self) -> String {
        let mut s = format!("QUBITS {}\n", self.num_qubits);
        let set = |a: &Active| match a {
            Active::All => "all".to_string(),
            Active::Qubits(qs) => qs.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(","),
        };
        for p in &self.primitives {
            let _ = match p {
                PulsePrimitive::Ms { theta, active } => writeln!(s, "MS {theta:?} {}", set(active)),
                PulsePrimitive::ZRot { qubit, theta } => writeln!(s, "Z {qubit} {theta:?}"),
                PulsePrimitive::Hide(q) => writeln!(s, "HIDE {q}"),
                PulsePrimitive::Unhide(q) => writeln!(s, "UNHIDE {q}"),
                PulsePrimitive::XAll { theta, active } => writeln!(s, "XALL {theta:?} {}", set(active)),
            };
        }
        s
    }

    pub fn parse(text: &str) -> Result<PulseSequence> {
        let mut num_qubits = None;
        let mut primitives = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line, msg };
            let parts: Vec<&str> = l.split_whitespace().collect();
            let float = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad angle {s:?}")));
            let index = |s: &str| s.parse::<usize>().map_err(|_| err(format!("bad qubit {s:?}")));
            let set = |s: &str| -> Result<Active> {
                if s.eq_ignore_ascii_case("all") {
                    Ok(Active::All)
                } else {
                    Ok(Active::Qubits(s.split(',').map(|q| index(q.trim())).collect::<Result<_>>()?))
                }
            };
            let arity = |k: usize| {
                if parts.len() == k {
                    Ok(())
                } else {
                    Err(err(format!("expected {} fields, got {}", k, parts.len())))
                }
            };
            let kw = parts[0].to_ascii_uppercase();
            if kw == "QUBITS" {
                arity(2)?;
                if num_qubits.is_some() || !primitives.is_empty() {
                    return Err(err("QUBITS must be the first statement".into()));
                }
                num_qubits = Some(index(parts[1])?);
                continue;
            }
            if num_qubits.is_none() {
                return Err(err("missing QUBITS header".into()));
            }
            let p = match kw.as_str() {
                "MS" => {
                    arity(3)?;
                    PulsePrimitive::Ms { theta: float(parts[1])?, active: set(parts[2])? }
                }
                "XALL" => {
                    arity(3)?;
                    PulsePrimitive::XAll { theta: float(parts[1])?, active: set(parts[2])? }
                }
                "Z" => {
                    arity(3)?;
                    PulsePrimitive::ZRot { qubit: index(parts[1])?, theta: float(parts[2])? }
                }
                "HIDE" => {
                    arity(2)?;
                    PulsePrimitive::Hide(index(parts[1])?)
                }
                "UNHIDE" => {
                    arity(2)?;
                    PulsePrimitive::Unhide(index(parts[1])?)
                }
                other => return Err(err(format!("unknown primitive {other:?}"))),
            };
            primitives.push(p);
        }
        let num_qubits = num_qubits.ok_or(Error::Parse { line: 1, msg: "missing QUBITS header".into() })?;
        let seq = PulseSequence { num_qubits, primitives };
        seq.validate()?;
        Ok(seq)
    }
}

enum Resolved {
    Ms(f64, Vec<usize>),
    X(f64, Vec<usize>),
    Z(usize, f64),
}

pub fn all_ones(n: usize) -> StateVector {
    StateVector::basis(n, (1usize << n) - 1)
}

/// Two π/8 MS pulses around a π phase flip on `flipped`: every coupling
/// between a flipped and an unflipped ion cancels, the rest accumulate π/4.
fn refocused_block(seq: &mut PulseSequence, flipped: &[usize]) {
    for _ in 0..2 {
        seq.ms(FRAC_PI_8);
        for &q in flipped {
            seq.z(q, PI);
        }
    }
}

/// First half of the four-qubit linear-cluster sequence: hide the end ions,
/// entangle the middle pair with MS(π/4), unhide.
pub fn lc4_part_one() -> PulseSequence {
    let mut seq = PulseSequence::new(4);
    seq.push(PulsePrimitive::Hide(0)).push(PulsePrimitive::Hide(3)).ms(FRAC_PI_4);
    seq.push(PulsePrimitive::Unhide(0)).push(PulsePrimitive::Unhide(3));
    seq
}

/// Pulse program for a graph family; simulated from |1⟩^⊗n it yields the
/// family's experimental state, which the matching correction table maps
/// onto the CZ graph state.
pub fn compile_graph(family: GraphFamily) -> Result<PulseSequence> {
    match family {
        GraphFamily::Ghz(n) if (2..=MAX_QUBITS).contains(&n) => {
            let mut seq = PulseSequence::new(n);
            seq.ms(FRAC_PI_4);
            Ok(seq)
        }
        GraphFamily::Lc4 => {
            let mut seq = lc4_part_one();
            refocused_block(&mut seq, &[0, 1]);
            // frame flips on the end ions
            seq.z(0, PI).z(3, PI);
            Ok(seq)
        }
        GraphFamily::Rc4 => {
            let mut seq = PulseSequence::new(4);
            refocused_block(&mut seq, &[0]);
            refocused_block(&mut seq, &[2]);
            // the (1,3) diagonal picks up exp(-iπ/2 XX) ∝ XX; undo it
            seq.push(PulsePrimitive::XAll { theta: PI, active: Active::Qubits(vec![1, 3]) });
            Ok(seq)
        }
        GraphFamily::Ec(n) if n == 2 || (n % 2 == 1 && n + 2 <= MAX_QUBITS) => {
            let (a, b) = (0, n + 1);
            let mut seq = PulseSequence::new(n + 2);
            refocused_block(&mut seq, &[a]);
            refocused_block(&mut seq, &[b]);
            if n == 2 {
                seq.push(PulsePrimitive::XAll { theta: PI, active: Active::Qubits(vec![1, 2]) });
            } else if n % 4 == 3 {
                seq.z(a, PI).z(b, PI);
            }
            Ok(seq)
        }
        other => Err(Error::UnsupportedFamily(other.label())),
    }
}

/// Fidelity between the corrected compiled state and the CZ graph state.
pub fn verify_family(family: GraphFamily) -> Result<f64> {
    let raw = compile_graph(family)?.run()?;
    let corrected = CorrectionTable::for_family(family)?.apply(&raw)?;
    let target = build_graph_state(&GraphSpec::from_family(family)?);
    corrected.fidelity(&target)
}

/// Checks that Z_k MS(θ) Z_k MS(θ) equals MS(2θ) on the other ions, up to a
/// global phase.
pub fn refocus_check(k: usize, theta: f64, n: usize) -> Result<bool> {
    if k >= n {
        return Err(Error::QubitOutOfRange { index: k, num_qubits: n });
    }
    let all: Vec<usize> = (0..n).collect();
    let ms = ms_unitary(theta, &all, n)?;
    let mut zk = linalg::identity(1);
    for q in 0..n {
        zk = linalg::kron(&zk, &if q == k { linalg::pauli_z() } else { linalg::identity(2) });
    }
    let sandwich = &zk * &ms * &zk * &ms;
    let rest: Vec<usize> = (0..n).filter(|&q| q != k).collect();
    let expected = if rest.len() >= 2 { ms_unitary(2.0 * theta, &rest, n)? } else { linalg::identity(1 << n) };
    Ok(linalg::distance_up_to_phase(&sandwich, &expected) < 1e-10)
}

/// Fragment equivalent to exp(iθX) on every target and identity elsewhere:
/// carrier rotations of opposite sign bracketing π phase flips of the targets.
pub fn error_implementation_block(targets: &[usize], theta: f64, n: usize) -> Result<PulseSequence> {
    if targets.is_empty() {
        return Err(Error::InvalidArgument("error block needs at least one target".into()));
    }
    validate_set(targets, n)?;
    let mut seq = PulseSequence::new(n);
    seq.push(PulsePrimitive::XAll { theta: -theta, active: Active::All });
    for &t in targets {
        seq.z(t, PI);
    }
    seq.push(PulsePrimitive::XAll { theta, active: Active::All });
    for &t in targets {
        seq.z(t, PI);
    }
    Ok(seq)
}

/// The experimental four-qubit linear cluster, as an explicit superposition.
pub fn e_lc4_state() -> StateVector {
    let s = 1.0 / 8f64.sqrt();
    let terms: [(usize, C64); 8] = [
        (0b0000, C64::new(s, 0.0)),
        (0b0011, C64::new(0.0, -s)),
        (0b0101, C64::new(-s, 0.0)),
        (0b0110, C64::new(0.0, -s)),
        (0b1001, C64::new(0.0, s)),
        (0b1010, C64::new(-s, 0.0)),
        (0b1100, C64::new(0.0, -s)),
        (0b1111, C64::new(-s, 0.0)),
    ];
    let mut amps = vec![ZERO; 16];
    for (i, a) in terms {
        amps[i] = a;
    }
    StateVector::from_amplitudes(amps).unwrap()
}

/// The experimental error-correction resource
/// 2|E⟩ = (-i|−⟩|0…0⟩ + |+⟩|1…1⟩)|−⟩ + (|−⟩|1…1⟩ + i|+⟩|0…0⟩)|+⟩
/// on A, C_1..C_n, B.
pub fn e_ec_state(n: usize) -> Result<StateVector> {
    if n == 0 || n + 2 > MAX_QUBITS {
        return Err(Error::InvalidArgument(format!("unsupported code length {n}")));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = [C64::new(h, 0.0), C64::new(h, 0.0)];
    let minus = [C64::new(h, 0.0), C64::new(-h, 0.0)];
    let ones = (1usize << n) - 1;
    let nq = n + 2;
    let mut amps = vec![ZERO; 1 << nq];
    // (coefficient, A ket, codeword pattern, B ket)
    let terms = [
        (C64::new(0.0, -1.0), minus, 0usize, minus),
        (C64::new(1.0, 0.0), plus, ones, minus),
        (C64::new(1.0, 0.0), minus, ones, plus),
        (C64::new(0.0, 1.0), plus, 0usize, plus),
    ];
    for (c, ka, code, kb) in terms {
        for a in 0..2 {
            for b in 0..2 {
                let idx = (a << (n + 1)) | (code << 1) | b;
                amps[idx] += c * ka[a] * kb[b] * 0.5;
            }
        }
    }
    StateVector::from_amplitudes(amps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip_is_exact() {
        let mut seq = compile_graph(GraphFamily::Lc4).unwrap();
        seq.push(PulsePrimitive::XAll { theta: 0.1 + 0.2, active: Active::Qubits(vec![1, 2]) });
        let back = PulseSequence::parse(&seq.to_text()).unwrap();
        assert_eq!(back, seq);
        assert_eq!(back.to_text(), seq.to_text());
    }

    #[test]
    fn parse_errors() {
        assert!(PulseSequence::parse("MS 0.1 all\n").is_err());
        assert!(PulseSequence::parse("QUBITS 2\nUNHIDE 0\n").is_err());
        assert!(PulseSequence::parse("QUBITS 3\nHIDE 0\nMS 0.1 0,1\nUNHIDE 0\n").is_err());
        assert!(PulseSequence::parse("QUBITS 3\nHIDE 0\n").is_err());
        assert!(PulseSequence::parse("QUBITS 2\nFOO 1\n").is_err());
    }

    #[test]
    fn physics_theta() {
        let p = PhysicalParams { eta1: 1.0, omega: 2.0, delta: 2.0, n_ions: 1 };
        assert!((theta_from_physics(&p).unwrap() - PI).abs() < 1e-15);
        let q = PhysicalParams { n_ions: 2, ..p };
        assert!((theta_from_physics(&q).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!(theta_from_physics(&PhysicalParams { omega: 0.0, ..p }).is_err());
    }

    #[test]
    fn ms_requires_two_ions() {
        assert!(ms_unitary(0.1, &[0], 3).is_err());
    }
}
