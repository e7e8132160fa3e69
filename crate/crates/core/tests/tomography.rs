use mbqc_core::graph::{build_graph_state, GraphSpec};
use mbqc_core::state::Channel;
use mbqc_core::tomography::*;
use mbqc_core::{DensityMatrix, Error, StateVector};

fn depolarized(psi: &StateVector, p: f64) -> DensityMatrix {
    let mut rho = psi.to_density();
    for q in 0..psi.num_qubits() {
        rho = rho.apply_channel(&Channel::Depolarize { p, qubit: q }).unwrap();
    }
    rho
}

#[test]
fn plus_state_z_statistics() {
    let rho = StateVector::plus(1).to_density();
    let s = MeasurementSettings::new(vec!["Z".parse().unwrap()], 100_000).unwrap();
    let c = sample_counts(&rho, &s, 17).unwrap();
    let f = c.frequencies(&"Z".parse().unwrap()).unwrap();
    assert!((f[0] - 0.5).abs() < 0.005);
    assert_eq!(c.total(&"Z".parse().unwrap()), 100_000.0);
}

#[test]
fn stabilizer_settings_are_deterministic() {
    // XZXZ covers the stabilizers XZII and IZXZ, so their outcome parities are fixed
    let g = GraphSpec::lc4();
    let rho = build_graph_state(&g).to_density();
    let setting: Setting = "XZXZ".parse().unwrap();
    let p = setting_probabilities(&rho, &setting).unwrap();
    for (o, &pr) in p.iter().enumerate() {
        if pr > 1e-12 {
            let bit = |q: usize| (o >> (3 - q)) & 1;
            assert_eq!((bit(0) + bit(1)) % 2, 0);
            assert_eq!((bit(1) + bit(2) + bit(3)) % 2, 0);
        }
    }
}

#[test]
fn settings_validation() {
    assert!(MeasurementSettings::new(vec!["XZ".parse().unwrap(), "XZ".parse().unwrap()], 10).is_err());
    assert!(MeasurementSettings::new(vec!["XZ".parse().unwrap()], 0).is_err());
    assert!(matches!(MeasurementSettings::full(7, 10), Err(Error::TooManyQubits { requested: 7, .. })));
}

#[test]
fn exact_reconstruction_of_graph_states() {
    for g in [GraphSpec::linear(3), GraphSpec::lc4(), GraphSpec::ring(5)] {
        let psi = build_graph_state(&g);
        let c = exact_counts(&psi.to_density(), &MeasurementSettings::full(g.num_vertices(), 1000).unwrap()).unwrap();
        let r = mle_reconstruct(&c).unwrap();
        assert!(r.rho.fidelity(&psi).unwrap() >= 1.0 - 1e-8);
        assert!(r.rho.is_physical());
    }
}

#[test]
fn likelihood_never_decreases() {
    let psi = build_graph_state(&GraphSpec::lc4());
    let rho = depolarized(&psi, 0.05);
    let c = sample_counts(&rho, &MeasurementSettings::full(4, 300).unwrap(), 8).unwrap();
    for init in [MleInit::MaximallyMixed, MleInit::LinearInversion] {
        let opts = MleOptions { init, max_iterations: 400, ..MleOptions::default() };
        let r = mle_reconstruct_with(&c, &opts).unwrap();
        assert!(r.likelihood_trace.windows(2).all(|w| w[1] >= w[0]));
        assert!(r.rho.is_physical());
    }
}

#[test]
fn incomplete_settings_are_rejected() {
    let rho = StateVector::plus(2).to_density();
    let s = MeasurementSettings::new(vec!["ZZ".parse().unwrap(), "XX".parse().unwrap()], 100).unwrap();
    let c = exact_counts(&rho, &s).unwrap();
    assert!(!is_informationally_complete(&c));
    assert!(matches!(mle_reconstruct(&c), Err(Error::InformationallyIncomplete { covered: 7, needed: 16 })));
}

#[test]
fn counts_csv_round_trip() {
    let rho = build_graph_state(&GraphSpec::linear(2)).to_density();
    let c = sample_counts(&rho, &MeasurementSettings::full(2, 50).unwrap(), 1).unwrap();
    let mut buf = b"# schema=1\n".to_vec();
    c.write_csv(&mut buf).unwrap();
    assert_eq!(CountsTable::read_csv(buf.as_slice()).unwrap(), c);
    assert!(CountsTable::read_csv("setting,outcome,count\nXQ,00,1\n".as_bytes()).is_err());
    assert!(CountsTable::read_csv("setting,outcome,count\nXZ,0,1\n".as_bytes()).is_err());
}

#[test]
fn sampling_is_reproducible() {
    let rho = build_graph_state(&GraphSpec::linear(3)).to_density();
    let s = MeasurementSettings::full(3, 100).unwrap();
    assert_eq!(sample_counts(&rho, &s, 4).unwrap(), sample_counts(&rho, &s, 4).unwrap());
    assert_ne!(sample_counts(&rho, &s, 4).unwrap(), sample_counts(&rho, &s, 5).unwrap());
    let e1 = mc_error_bar(&sample_counts(&rho, &s, 4).unwrap(), 4, &Functional::Purity, 9).unwrap();
    let e2 = mc_error_bar(&sample_counts(&rho, &s, 4).unwrap(), 4, &Functional::Purity, 9).unwrap();
    assert_eq!(e1.samples, e2.samples);
}

#[test]
fn bell_estimates_from_a_setting_subset() {
    let g = GraphSpec::lc4();
    let settings = bell_settings(&g).unwrap();
    assert!(settings.len() <= 16);
    let rho = build_graph_state(&g).to_density();
    let c = exact_counts(&rho, &MeasurementSettings::new(settings, 1000).unwrap()).unwrap();
    assert!((bell_from_counts(&c, &g).unwrap() - 1.0).abs() < 1e-10);
    // dropping settings is reported
    let partial = exact_counts(&rho, &MeasurementSettings::new(vec!["XZXZ".parse().unwrap()], 10).unwrap()).unwrap();
    match bell_from_counts(&partial, &g) {
        Err(Error::MissingSettings(v)) => assert!(!v.is_empty()),
        other => panic!("expected missing settings, got {other:?}"),
    }
    // seven qubits: only the Bell subset is feasible
    let ec5 = GraphSpec::ec(5).unwrap();
    let s = MeasurementSettings::for_bell(&ec5, 200).unwrap();
    let c = exact_counts(&build_graph_state(&ec5).to_density(), &s).unwrap();
    assert!((bell_from_counts(&c, &ec5).unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn functionals_on_mle_output() {
    let g = GraphSpec::linear(2);
    let psi = build_graph_state(&g);
    let c = exact_counts(&psi.to_density(), &MeasurementSettings::full(2, 1000).unwrap()).unwrap();
    let rho = mle_reconstruct(&c).unwrap().rho;
    assert!((Functional::Tangle.evaluate(&rho).unwrap() - 1.0).abs() < 1e-8);
    assert!((Functional::Purity.evaluate(&rho).unwrap() - 1.0).abs() < 1e-8);
    assert!((Functional::BellExpectation(g).evaluate(&rho).unwrap() - 1.0).abs() < 1e-8);
}
