mod common;

use common::*;
use mbqc_core::linalg::{self, Matrix};
use mbqc_core::pauli::{Pauli, PauliString};
use mbqc_core::state::{Channel, DensityMatrix, MeasureMode, MeasurementBasis, StateVector};
use mbqc_core::{Error, C64};
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

fn random_state(n: usize, seed: &[f64]) -> StateVector {
    let amps = (0..1usize << n).map(|i| C64::new(seed[2 * i % seed.len()], seed[(2 * i + 1) % seed.len()] - 0.3)).collect();
    StateVector::from_amplitudes(amps).unwrap()
}

#[test]
fn gates_on_msb_match_dense_kron() {
    let psi = random_state(3, &[0.3, -0.2, 0.9, 0.1, 0.5, -0.7, 0.25]);
    for q in 0..3 {
        let u = linalg::ry(0.4) * linalg::rz(1.3);
        let got = psi.apply_unitary(&u, &[q]).unwrap();
        let want = embed(&u, q, 3) * to_vec(&psi);
        assert!((overlap_sq(&to_vec(&got), &want) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn two_qubit_gate_on_non_adjacent_targets() {
    let psi = StateVector::plus(3);
    let got = psi.apply_unitary(&linalg::cz(), &[2, 0]).unwrap();
    let want = dense_cz(0, 2, 3) * plus_vec(3);
    assert!((overlap_sq(&to_vec(&got), &want) - 1.0).abs() < 1e-12);
}

#[test]
fn invalid_inputs_are_rejected() {
    let psi = StateVector::zero(2);
    assert!(matches!(psi.apply_unitary(&linalg::hadamard(), &[2]), Err(Error::QubitOutOfRange { .. })));
    assert!(matches!(psi.apply_unitary(&linalg::cz(), &[1, 1]), Err(Error::DuplicateQubit(1))));
    let bad = Matrix::from_element(2, 2, C64::new(1.0, 0.0));
    assert!(matches!(psi.apply_unitary(&bad, &[0]), Err(Error::NotUnitary(_))));
    assert!(StateVector::from_amplitudes(vec![C64::new(0.0, 0.0); 3]).is_err());
}

#[test]
fn equatorial_basis_outcomes() {
    // |+⟩ measured in B(0) is deterministic, in B(π/2) unbiased
    let plus = StateVector::plus(1);
    let b = plus.measure(0, MeasurementBasis::Equatorial(0.0), MeasureMode::Branch).unwrap();
    assert!((b[0].probability - 1.0).abs() < 1e-14);
    let b = plus.measure(0, MeasurementBasis::Equatorial(FRAC_PI_2), MeasureMode::Branch).unwrap();
    assert!((b[0].probability - 0.5).abs() < 1e-14);
    let sampled = plus.measure(0, MeasurementBasis::PauliZ, MeasureMode::Sample { seed: 9 }).unwrap();
    assert_eq!(sampled.len(), 1);
}

#[test]
fn channels_match_definitions() {
    let rho = StateVector::plus(1).to_density();
    let m = |ch| rho.apply_channel(&ch).unwrap().matrix()[(0, 1)].re;
    assert!((m(Channel::Dephase { p: 0.4, qubit: 0 }) - 0.5 * 0.6).abs() < 1e-14);
    assert!((m(Channel::Depolarize { p: 0.4, qubit: 0 }) - 0.5 * 0.6).abs() < 1e-14);
    assert!((m(Channel::PhaseFlip { p: 0.4, qubit: 0 }) - 0.5 * 0.2).abs() < 1e-14);
    assert!(matches!(rho.apply_channel(&Channel::Dephase { p: 1.5, qubit: 0 }), Err(Error::InvalidProbability(_))));
}

#[test]
fn tangle_reference_values() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = StateVector::from_amplitudes(vec![C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(h, 0.0)]).unwrap();
    assert!((bell.to_density().tangle().unwrap() - 1.0).abs() < 1e-10);
    assert!(DensityMatrix::maximally_mixed(2).tangle().unwrap().abs() < 1e-12);
    assert!(DensityMatrix::maximally_mixed(3).tangle().is_err());
    // Werner state with singlet weight w: concurrence max(0, (3w-1)/2)
    let w = 0.8;
    let mixed = DensityMatrix::mixture(&[(w, bell.to_density()), (1.0 - w, DensityMatrix::maximally_mixed(2))]).unwrap();
    let c: f64 = (3.0 * w - 1.0) / 2.0;
    assert!((mixed.tangle().unwrap() - c * c).abs() < 1e-10);
}

#[test]
fn partial_trace_and_purity() {
    let psi = random_state(3, &[0.1, 0.4, -0.3, 0.8, 0.2]);
    let rho = psi.to_density();
    assert!((rho.purity() - 1.0).abs() < 1e-12);
    let r = rho.partial_trace(&[0, 2]).unwrap();
    assert!((r.trace() - 1.0).abs() < 1e-12);
    assert!(r.is_physical());
    // purity of a reduced pure-state marginal equals that of its complement
    let other = rho.partial_trace(&[1]).unwrap();
    assert!((r.purity() - other.purity()).abs() < 1e-12);
}

#[test]
fn pauli_strings_match_dense_products() {
    for (a, b) in [("XZY", "ZZX"), ("YYI", "XIZ"), ("IXI", "IYI")] {
        let pa: PauliString = format!("+{a}").parse().unwrap();
        let pb: PauliString = format!("+{b}").parse().unwrap();
        let prod = &pa * &pb;
        let dense = pauli_dense(a) * pauli_dense(b);
        assert!(max_diff(&prod.matrix(), &dense) < 1e-14);
        assert_eq!(pa.commutes_with(&pb), max_diff(&(pauli_dense(a) * pauli_dense(b)), &(pauli_dense(b) * pauli_dense(a))) < 1e-14);
    }
    assert_eq!(PauliString::single(3, 1, Pauli::Y).to_string(), "+IYI");
    assert_eq!("-ZYXY".parse::<PauliString>().unwrap().to_string(), "-ZYXY");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tangle_is_local_unitary_invariant(
        a in proptest::collection::vec(-1.0f64..1.0, 8),
        t in proptest::collection::vec(-PI..PI, 6),
        w in 0.0f64..1.0,
    ) {
        prop_assume!(a.iter().map(|x| x * x).sum::<f64>() > 1e-3);
        let psi = StateVector::from_amplitudes((0..4).map(|i| C64::new(a[2 * i], a[2 * i + 1])).collect()).unwrap();
        let rho = DensityMatrix::mixture(&[(w, psi.to_density()), (1.0 - w, DensityMatrix::maximally_mixed(2))]).unwrap();
        let u0 = linalg::rz(t[0]) * linalg::ry(t[1]) * linalg::rz(t[2]);
        let u1 = linalg::rz(t[3]) * linalg::ry(t[4]) * linalg::rz(t[5]);
        let moved = rho.apply_unitary(&u0, &[0]).unwrap().apply_unitary(&u1, &[1]).unwrap();
        let (x, y) = (rho.tangle().unwrap(), moved.tangle().unwrap());
        prop_assert!((0.0..=1.0 + 1e-9).contains(&x));
        prop_assert!((x - y).abs() < 1e-8);
    }

    #[test]
    fn unitaries_preserve_norm_and_density_picture(
        a in proptest::collection::vec(-1.0f64..1.0, 16),
        t in -PI..PI,
        q in 0usize..3,
    ) {
        prop_assume!(a.iter().map(|x| x * x).sum::<f64>() > 1e-3);
        let psi = StateVector::from_amplitudes((0..8).map(|i| C64::new(a[2 * i], a[2 * i + 1])).collect()).unwrap();
        let u = linalg::rx(t) * linalg::hadamard();
        let out = psi.apply_unitary(&u, &[q]).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
        let rho = psi.to_density().apply_unitary(&u, &[q]).unwrap();
        prop_assert!((rho.fidelity(&out).unwrap() - 1.0).abs() < 1e-10);
    }
}
