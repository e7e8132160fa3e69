use mbqc_core::graph::{build_graph_state, GraphSpec};
use mbqc_core::linalg;
use mbqc_core::mbqc::*;
use mbqc_core::{Error, StateVector};
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

const FIG1C: [[f64; 3]; 5] =
    [[FRAC_PI_2, 0.0, 0.0], [0.0, 0.0, -FRAC_PI_2], [FRAC_PI_2, -FRAC_PI_2, 0.0], [FRAC_PI_2, 0.0, -FRAC_PI_2], [FRAC_PI_4, 0.0, 0.0]];

#[test]
fn single_qubit_settings_match_the_circuit() {
    let mut blochs = Vec::new();
    for [a, b, c] in FIG1C {
        let r = run_single_qubit_pattern(a, b, c, PatternMode::Branch).unwrap();
        assert!(r.output.fidelity(&oracle_single_output(a, b, c)).unwrap() >= 1.0 - 1e-9);
        assert!(r.output.purity() >= 1.0 - 1e-9);
        assert_eq!(r.per_branch.len(), 8);
        blochs.push(bloch_vector(&r.output).unwrap());
    }
    for (i, x) in blochs.iter().enumerate() {
        assert!((x.iter().map(|c| c * c).sum::<f64>() - 1.0).abs() < 1e-9);
        for y in &blochs[i + 1..] {
            assert!(x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum::<f64>() > 1e-3);
        }
    }
    // zero angles: identity on |+⟩
    let r = run_single_qubit_pattern(0.0, 0.0, 0.0, PatternMode::Branch).unwrap();
    let b = bloch_vector(&r.output).unwrap();
    assert!((b[0] - 1.0).abs() < 1e-9);
    // π/4 on the first qubit lands on the equator
    let b = bloch_vector(&run_single_qubit_pattern(FRAC_PI_4, 0.0, 0.0, PatternMode::Branch).unwrap().output).unwrap();
    assert!(b[2].abs() < 1e-9);
}

#[test]
fn oracle_is_a_euler_rotation() {
    let (a, b, c) = (0.4, -1.2, 2.0);
    let u = equivalent_circuit_single(a, b, c);
    let euler = linalg::rz(-c) * linalg::rx(-b) * linalg::rz(-a);
    assert!(linalg::distance_up_to_phase(&u, &euler) < 1e-12);
}

#[test]
fn two_qubit_settings() {
    let ent = run_two_qubit_pattern(FRAC_PI_2, -FRAC_PI_2, PatternMode::Branch).unwrap();
    assert!(ent.output.fidelity(&oracle_two_output(FRAC_PI_2, -FRAC_PI_2)).unwrap() >= 1.0 - 1e-9);
    assert!((ent.output.tangle().unwrap() - 1.0).abs() < 1e-9);
    let sep = run_two_qubit_pattern(0.0, 0.0, PatternMode::Branch).unwrap();
    assert!(sep.output.fidelity(&oracle_two_output(0.0, 0.0)).unwrap() >= 1.0 - 1e-9);
    assert!(sep.output.tangle().unwrap() <= 1e-9);
    assert!(sep.output.purity() >= 1.0 - 1e-9);
}

#[test]
fn byproducts_differ_between_branches_but_outputs_agree() {
    let r = run_two_qubit_pattern(0.7, 0.2, PatternMode::Branch).unwrap();
    let target = oracle_two_output(0.7, 0.2);
    let mut distinct = std::collections::BTreeSet::new();
    for b in &r.per_branch {
        assert!((b.probability - 0.25).abs() < 1e-12);
        distinct.insert(b.byproduct.to_string());
        let fixed = b.byproduct.apply(b.residual.as_ref().unwrap()).unwrap();
        assert!((fixed.fidelity(&target).unwrap() - 1.0).abs() < 1e-10);
    }
    assert_eq!(distinct.len(), 4);
}

#[test]
fn sampling_mode_is_seeded_and_deterministic() {
    let mode = PatternMode::Sample { seed: 42, shots: 200 };
    let a = run_single_qubit_pattern(0.3, 0.9, -0.4, mode).unwrap();
    let b = run_single_qubit_pattern(0.3, 0.9, -0.4, mode).unwrap();
    assert_eq!(a.output.matrix(), b.output.matrix());
    assert!(a.output.fidelity(&oracle_single_output(0.3, 0.9, -0.4)).unwrap() >= 1.0 - 1e-9);
    let total: f64 = a.per_branch.iter().map(|r| r.probability).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn chain_pattern_validates_inputs() {
    let cluster = build_graph_state(&GraphSpec::linear(3));
    assert!(run_chain_pattern(&cluster, &[0.1, 0.2, 0.3], PatternMode::Branch).is_err());
    assert!(matches!(bloch_vector(&StateVector::zero(2).to_density()), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn z_measurement_deletes_a_vertex() {
    let g = GraphSpec::lc4();
    let (smaller, branches) = delete_vertex_by_z(&build_graph_state(&g), &g, 1).unwrap();
    assert_eq!(smaller.edges(), &[(1, 2)]);
    let target = build_graph_state(&smaller);
    for (p, s) in branches {
        assert!((p - 0.5).abs() < 1e-12);
        assert!((s.fidelity(&target).unwrap() - 1.0).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_angles_match_oracles(a in -PI..PI, b in -PI..PI, c in -PI..PI) {
        let r = run_single_qubit_pattern(a, b, c, PatternMode::Branch).unwrap();
        prop_assert!(r.output.fidelity(&oracle_single_output(a, b, c)).unwrap() >= 1.0 - 1e-9);
        let r = run_two_qubit_pattern(a, b, PatternMode::Branch).unwrap();
        prop_assert!(r.output.fidelity(&oracle_two_output(a, b)).unwrap() >= 1.0 - 1e-9);
        prop_assert!(r.output.purity() >= 1.0 - 1e-9);
    }
}
