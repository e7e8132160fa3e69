//! Local correction tables relating pulse-generated states to CZ graph
//! states, and Pauli-setting reinterpretation through them.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::GraphFamily;
use crate::linalg::{self, Matrix};
use crate::pauli::{identify_single_pauli, Pauli, PauliString};
use crate::state::{DensityMatrix, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Factor {
    H,
    X,
    Y,
    Z,
    /// e^{+iπ/4 X}
    ExpPlusQuarterX,
    /// e^{-iπ/4 X}
    ExpMinusQuarterX,
}

impl Factor {
    pub fn matrix(self) -> Matrix {
        let q = std::f64::consts::FRAC_PI_4;
        match self {
            Factor::H => linalg::hadamard(),
            Factor::X => linalg::pauli_x(),
            Factor::Y => linalg::pauli_y(),
            Factor::Z => linalg::pauli_z(),
            Factor::ExpPlusQuarterX => linalg::exp_involution(&linalg::pauli_x(), -q),
            Factor::ExpMinusQuarterX => linalg::exp_involution(&linalg::pauli_x(), q),
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Factor::H => "H",
            Factor::X => "X",
            Factor::Y => "Y",
            Factor::Z => "Z",
            Factor::ExpPlusQuarterX => "e^{+iπ/4X}",
            Factor::ExpMinusQuarterX => "e^{-iπ/4X}",
        })
    }
}

/// One entry per qubit; each entry is a product written left to right, so
/// the rightmost factor acts first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionTable {
    pub name: String,
    pub entries: Vec<Vec<Factor>>,
}

use Factor::*;

impl CorrectionTable {
    pub fn new(name: &str, entries: Vec<Vec<Factor>>) -> Result<Self> {
        let t = CorrectionTable { name: name.to_string(), entries };
        for (q, u) in t.unitaries().iter().enumerate() {
            if !is_single_qubit_clifford(u) {
                return Err(Error::InvalidArgument(format!("entry for qubit {q} is not Clifford")));
            }
        }
        Ok(t)
    }

    pub fn identity(n: usize) -> Self {
        CorrectionTable { name: "identity".into(), entries: vec![vec![]; n] }
    }

    /// Same factors on every qubit.
    pub fn uniform(n: usize, factors: &[Factor]) -> Self {
        CorrectionTable { name: "uniform".into(), entries: vec![factors.to_vec(); n] }
    }

    pub fn lc4() -> Self {
        CorrectionTable {
            name: "LC4".into(),
            entries: vec![
                vec![H, Z, ExpMinusQuarterX],
                vec![H, Z, X],
                // H Z rather than H X: this is the entry that lands on LC4
                vec![H, Z],
                vec![H, ExpMinusQuarterX],
            ],
        }
    }

    /// Odd-n error-correction graphs, layout A, C_1..C_n, B.
    pub fn ec_odd(n: usize) -> Result<Self> {
        if n.is_multiple_of(2) {
            return Err(Error::EvenCodeLength(n));
        }
        let mut entries = vec![vec![H, ExpPlusQuarterX, Z]];
        entries.extend(std::iter::repeat_n(vec![H], n));
        entries.push(vec![H, ExpPlusQuarterX, Z]);
        Ok(CorrectionTable { name: format!("EC{n}"), entries })
    }

    pub fn rc4() -> Self {
        CorrectionTable {
            name: "RC4".into(),
            entries: vec![vec![H, X, Z], vec![H, X], vec![H, X], vec![H, X, Z]],
        }
    }

    /// The ring table placed on the (A, C_1, C_2, B) layout: ring order
    /// A, C_1, B, C_2.
    pub fn ec2() -> Self {
        CorrectionTable {
            name: "EC2".into(),
            entries: vec![vec![H, X, Z], vec![H, X], vec![H, X, Z], vec![H, X]],
        }
    }

    /// Star graph centred on qubit 0 from a single global MS pulse.
    pub fn ghz(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("GHZ needs at least two qubits".into()));
        }
        let (center, leaf) = match n % 4 {
            0 => (vec![H, ExpMinusQuarterX, H], vec![H]),
            2 => (vec![H, ExpPlusQuarterX, H], vec![H]),
            // odd registers end up in a rotated basis; undo e^{-iπ/4X} first
            1 => (vec![H, ExpPlusQuarterX, H, ExpMinusQuarterX], vec![H, ExpMinusQuarterX]),
            _ => (vec![H, ExpMinusQuarterX, H, ExpMinusQuarterX], vec![H, ExpMinusQuarterX]),
        };
        let mut entries = vec![center];
        entries.extend(std::iter::repeat_n(leaf, n - 1));
        Ok(CorrectionTable { name: format!("GHZ{n}"), entries })
    }

    pub fn for_family(family: GraphFamily) -> Result<Self> {
        match family {
            GraphFamily::Lc4 => Ok(Self::lc4()),
            GraphFamily::Rc4 => Ok(Self::rc4()),
            GraphFamily::Ec(2) => Ok(Self::ec2()),
            GraphFamily::Ec(n) if n % 2 == 1 => Self::ec_odd(n),
            GraphFamily::Ghz(n) => Self::ghz(n),
            other => Err(Error::UnsupportedFamily(other.label())),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.entries.len()
    }

    pub fn unitaries(&self) -> Vec<Matrix> {
        self.entries
            .iter()
            .map(|fs| fs.iter().fold(linalg::identity(2), |acc, f| acc * f.matrix()))
            .collect()
    }

    pub fn is_clifford(&self) -> bool {
        self.unitaries().iter().all(is_single_qubit_clifford)
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.num_qubits() != self.num_qubits() {
            return Err(Error::DimensionMismatch { expected: self.num_qubits(), got: psi.num_qubits() });
        }
        let mut out = psi.clone();
        for (q, u) in self.unitaries().iter().enumerate() {
            out.apply_unitary_mut(u, &[q])?;
        }
        Ok(out)
    }

    pub fn apply_dm(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.num_qubits() != self.num_qubits() {
            return Err(Error::DimensionMismatch { expected: self.num_qubits(), got: rho.num_qubits() });
        }
        let mut out = rho.clone();
        for (q, u) in self.unitaries().iter().enumerate() {
            out = out.apply_unitary(u, &[q])?;
        }
        Ok(out)
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.entries
            .iter()
            .map(|fs| if fs.is_empty() { "I".to_string() } else { fs.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(" ") })
            .collect()
    }
}

fn conjugate_letter(u: &Matrix, p: Pauli, forward: bool) -> Option<(u8, Pauli)> {
    let m = if forward { u * p.matrix() * u.adjoint() } else { u.adjoint() * p.matrix() * u };
    identify_single_pauli(&m, 1e-9)
}

fn is_single_qubit_clifford(u: &Matrix) -> bool {
    [Pauli::X, Pauli::Y, Pauli::Z].iter().all(|&p| conjugate_letter(u, p, true).is_some())
}

fn conjugate_setting(setting: &PauliString, t: &CorrectionTable, forward: bool) -> Result<PauliString> {
    if setting.num_qubits() != t.num_qubits() {
        return Err(Error::DimensionMismatch { expected: t.num_qubits(), got: setting.num_qubits() });
    }
    let mut phase = setting.phase();
    let mut letters = Vec::with_capacity(setting.num_qubits());
    for (u, &p) in t.unitaries().iter().zip(setting.letters()) {
        let (k, q) = conjugate_letter(u, p, forward)
            .ok_or_else(|| Error::InvalidArgument("correction entry is not Clifford".into()))?;
        phase += k;
        letters.push(q);
    }
    Ok(PauliString::new(phase, letters))
}

/// With |corrected⟩ = T|raw⟩, measuring P on the corrected state equals
/// measuring T†PT on the raw state. Returns T†PT with its sign.
pub fn reinterpret_pauli_setting(setting: &PauliString, t: &CorrectionTable) -> Result<PauliString> {
    conjugate_setting(setting, t, false)
}

/// The opposite direction, T P T†: the raw-state setting that corresponds
/// to P when the table is read as a map from corrected to raw frame.
pub fn conjugate_forward(setting: &PauliString, t: &CorrectionTable) -> Result<PauliString> {
    conjugate_setting(setting, t, true)
}
