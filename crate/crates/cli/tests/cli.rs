use std::process::{Command, Output};

use mbqc_core::pulse::PulseSequence;
use serde_json::Value;

fn mbqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbqc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_ok(args: &[&str]) -> Value {
    let o = mbqc(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

/// Data rows of a schema-1 CSV as (header, rows).
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema=1"));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn error_kind(o: &Output) -> String {
    assert!(!o.status.success());
    let v: Value = serde_json::from_slice(&o.stderr).expect("JSON error record");
    assert_eq!(v["schema"], 1);
    v["error"]["kind"].as_str().unwrap().to_string()
}

#[test]
fn verify_families() {
    for args in [vec!["LC4"], vec!["GHZ", "3"], vec!["EC", "5"], vec!["RC4"], vec!["EC2"]] {
        let mut a = vec!["verify"];
        a.extend(args.iter().copied());
        let v = json_ok(&a);
        assert!(v["fidelity"].as_f64().unwrap() >= 1.0 - 1e-9);
        assert_eq!(v["pass"], true);
    }
    assert_eq!(json_ok(&["verify", "EC", "5"])["qubits"], 7);
    assert_eq!(error_kind(&mbqc(&["verify", "EC", "4"])), "UnsupportedFamily");
}

#[test]
fn verify_detects_a_broken_pulse_program() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&mbqc(&["compile", "LC4"]));
    assert!(PulseSequence::parse(&text).is_ok());
    let good = dir.path().join("good.txt");
    std::fs::write(&good, &text).unwrap();
    assert!(mbqc(&["verify", "LC4", "--pulses", good.to_str().unwrap()]).status.success());
    // drop the final frame flips
    let lines: Vec<&str> = text.lines().collect();
    let broken = dir.path().join("broken.txt");
    std::fs::write(&broken, lines[..lines.len() - 2].join("\n")).unwrap();
    let o = mbqc(&["verify", "LC4", "--pulses", broken.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn single_qubit_gates() {
    let o = mbqc(&[
        "gates", "single", "--angles", "pi/2,0,0", "--angles", "0,0,-pi/2", "--angles", "pi/2,-pi/2,0", "--angles",
        "pi/2,0,-pi/2", "--angles", "pi/4,0,0",
    ]);
    assert!(o.status.success());
    let (h, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert!((r[col(&h, "oracle_fidelity")].parse::<f64>().unwrap() - 1.0).abs() < 1e-9);
    }
    let (h, rows) = csv_rows(&stdout(&mbqc(&["gates", "single", "--angles", "0,0,0"])));
    let x: f64 = rows[0][col(&h, "x")].parse().unwrap();
    assert!((x - 1.0).abs() < 1e-9);
}

#[test]
fn two_qubit_gates_report_tangle() {
    let (h, rows) = csv_rows(&stdout(&mbqc(&["gates", "two", "--angles", "pi/2,-pi/2", "--angles", "0,0"])));
    let t: Vec<f64> = rows.iter().map(|r| r[col(&h, "tangle")].parse().unwrap()).collect();
    assert!((t[0] - 1.0).abs() < 1e-9 && t[1].abs() < 1e-9);
    assert_eq!(h.len(), 7 + 32);
}

#[test]
fn degrees_and_bad_input_are_rejected() {
    for bad in ["90,0,0", "45deg,0,0", "pi/2,0"] {
        assert_eq!(error_kind(&mbqc(&["gates", "single", "--angles", bad])), "InvalidArgument");
    }
    assert_eq!(error_kind(&mbqc(&["qec", "--n", "2"])), "EvenCodeLength");
    assert_eq!(error_kind(&mbqc(&["bell", "LC4", "--noise", "amplitude:0.1"])), "InvalidArgument");
}

#[test]
fn qec_curves() {
    let (h, rows) = csv_rows(&stdout(&mbqc(&["qec", "--n", "1,3,5", "--p-grid", "0:1:21"])));
    assert_eq!(rows.len(), 3 * 21 * 4);
    for r in &rows {
        let atf: f64 = r[col(&h, "atf")].parse().unwrap();
        let closed: f64 = r[col(&h, "atf_closed_form")].parse().unwrap();
        assert!((atf - closed).abs() < 1e-9);
        if r[col(&h, "p")] == "0.5" {
            assert!((atf - 0.5).abs() < 1e-9);
        }
    }
    let (h, rows) = csv_rows(&stdout(&mbqc(&["qec", "--n", "3", "--targets", "C1"])));
    assert!(rows.iter().all(|r| (r[col(&h, "atf")].parse::<f64>().unwrap() - 1.0).abs() < 1e-10));
    let (h, rows) = csv_rows(&stdout(&mbqc(&["qec", "--n", "1", "--inputs", "6", "--p-grid", "0:1:3"])));
    let mid: Vec<&Vec<String>> = rows.iter().filter(|r| r[col(&h, "p")] == "0.5").collect();
    assert_eq!(mid.len(), 6);
    assert!((mid[0][col(&h, "atf")].parse::<f64>().unwrap() - (4.0 * 0.5 + 2.0) / 6.0).abs() < 1e-9);
}

#[test]
fn bell_reports() {
    for (fam, bound) in [("LC4", 0.75), ("RC4", 0.75), ("EC1", 0.75), ("EC3", 0.75), ("EC5", 0.625)] {
        let v = json_ok(&["bell", fam]);
        assert!((v["expectation"].as_f64().unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(v["lhv_bound"].as_f64().unwrap(), bound);
        assert_eq!(v["violated"], true);
    }
    let mixed = json_ok(&["bell", "LC4", "--noise", "depolarize:1"]);
    assert!((mixed["expectation"].as_f64().unwrap() - 1.0 / 16.0).abs() < 1e-12);
    assert_eq!(mixed["violated"], false);
    let noisy = json_ok(&["bell", "LC4", "--noise", "depolarize:0.05", "--shots", "500", "--seed", "1"]);
    let e = noisy["expectation"].as_f64().unwrap();
    assert!((e - 0.85).abs() < 0.02 && noisy["violated"] == true);
    assert_eq!(noisy["finite_shot"]["violated"], true);
    assert_eq!(error_kind(&mbqc(&["bell", "GHZ5"])), "NoCitedBound");
}

#[test]
fn tomography_commands() {
    let o = mbqc(&["tomo", "EC5"]);
    assert_eq!(error_kind(&o), "InvalidArgument");
    assert!(String::from_utf8_lossy(&o.stderr).contains("impractical"));
    let v = json_ok(&["tomo", "EC5", "--bell-only", "--shots", "200", "--trials", "5"]);
    assert!(v["bell"].as_f64().unwrap() > 0.625);
    let v = json_ok(&["tomo", "EC1", "--exact"]);
    assert!((v["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let prefix = dir.path().join(tag);
        let o = mbqc(&["tomo", "LC4", "--shots", "200", "--seed", "9", "--trials", "4", "--out", prefix.to_str().unwrap()]);
        assert!(o.status.success());
        ["json", "_rho.csv", "_counts.csv"]
            .iter()
            .map(|s| {
                let name = if *s == "json" { format!("{tag}.json") } else { format!("{tag}{s}") };
                std::fs::read(dir.path().join(name)).unwrap()
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(run("a"), run("b"));
    let q = || stdout(&mbqc(&["qec", "--n", "5,1,3"]));
    assert_eq!(q(), q());
}

#[test]
fn config_round_trip_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gates", "two", "--angles", "pi/2,-pi/2", "--mode", "sample", "--shots", "300", "--seed", "5"];
    let direct = stdout(&mbqc(&args));
    let mut dump = vec!["--dump-config"];
    dump.extend(args);
    let toml_text = stdout(&mbqc(&dump));
    let path = dir.path().join("cfg.toml");
    std::fs::write(&path, &toml_text).unwrap();
    assert_eq!(stdout(&mbqc(&["run", "--config", path.to_str().unwrap()])), direct);
    let parsed = mbqc_cli::ExperimentConfig::from_toml(&toml_text).unwrap();
    assert_eq!(parsed.to_toml().unwrap(), toml_text);
    std::fs::write(&path, "command = \"gates\"\nbogus = 1\n").unwrap();
    assert_eq!(error_kind(&mbqc(&["run", "--config", path.to_str().unwrap()])), "Parse");
}
