//! Stabilizer Bell operators and their local-hidden-variable bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{stabilizer_group, GraphFamily, GraphSpec};
use crate::state::{DensityMatrix, StateVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellReport {
    pub graph: String,
    pub expectation: f64,
    pub lhv_bound: f64,
    pub violated: bool,
}

/// Largest value a local hidden-variable model can give the normalized Bell
/// operator of the graph. Only graphs with a known bound are supported.
pub fn lhv_bound(g: &GraphSpec) -> Result<f64> {
    match g.family() {
        Some(GraphFamily::Lc4) | Some(GraphFamily::Rc4) => Ok(0.75),
        Some(GraphFamily::Ec(1)) | Some(GraphFamily::Ec(2)) | Some(GraphFamily::Ec(3)) => Ok(0.75),
        Some(GraphFamily::Ec(5)) => Ok(0.625),
        Some(GraphFamily::Ghz(4)) => Ok(0.75),
        Some(GraphFamily::Ghz(6)) => Ok(0.625),
        _ => Err(Error::NoCitedBound(g.label())),
    }
}

/// (1/2^n) Σ_j ⟨s_j⟩ over the whole stabilizer group.
pub fn bell_value(rho: &DensityMatrix, g: &GraphSpec) -> Result<f64> {
    if rho.num_qubits() != g.num_vertices() {
        return Err(Error::DimensionMismatch { expected: g.num_vertices(), got: rho.num_qubits() });
    }
    let group = stabilizer_group(g)?.group();
    let mut acc = 0.0;
    for s in &group {
        acc += s.expectation_dm(rho)?.re;
    }
    Ok(acc / group.len() as f64)
}

pub fn bell_value_pure(psi: &StateVector, g: &GraphSpec) -> Result<f64> {
    if psi.num_qubits() != g.num_vertices() {
        return Err(Error::DimensionMismatch { expected: g.num_vertices(), got: psi.num_qubits() });
    }
    let group = stabilizer_group(g)?.group();
    let mut acc = 0.0;
    for s in &group {
        acc += s.expectation(psi)?.re;
    }
    Ok(acc / group.len() as f64)
}

pub fn bell_expectation(rho: &DensityMatrix, g: &GraphSpec) -> Result<BellReport> {
    let lhv_bound = lhv_bound(g)?;
    let expectation = bell_value(rho, g)?;
    Ok(BellReport { graph: g.label(), expectation, lhv_bound, violated: expectation > lhv_bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn custom_graph_has_no_bound() {
        let g = GraphSpec::linear(3);
        assert_eq!(lhv_bound(&g), Err(Error::NoCitedBound("custom".into())));
    }

    #[test]
    fn mixed_state_only_keeps_identity_term() {
        let g = GraphSpec::lc4();
        let r = bell_expectation(&DensityMatrix::maximally_mixed(4), &g).unwrap();
        assert!((r.expectation - 1.0 / 16.0).abs() < 1e-14);
        assert!(!r.violated);
    }
}
