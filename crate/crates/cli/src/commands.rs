//! Subcommand implementations. Each returns its artifacts as text so the
//! caller decides between stdout and files.

use serde::Serialize;
use serde_json::json;
use std::fmt::Write as _;

use mbqc_core::bell::{bell_value, lhv_bound};
use mbqc_core::correction::CorrectionTable;
use mbqc_core::graph::{build_graph_state, GraphFamily, GraphSpec};
use mbqc_core::mbqc::{
    bloch_vector, oracle_single_output, oracle_two_output, run_single_qubit_pattern, run_two_qubit_pattern, PatternMode,
};
use mbqc_core::pulse::{compile_graph, PulseSequence};
use mbqc_core::qec::{atf_sweep, ideal_atf_curve_targets, ErrorTargets, InputSet};
use mbqc_core::tomography::{
    bell_from_counts, exact_counts, mc_bell_from_counts, mc_error_bars, mle_reconstruct, sample_counts, CountsTable,
    Functional, McEstimate, MeasurementSettings, MleOptions, MAX_FULL_TOMOGRAPHY_QUBITS,
};
use mbqc_core::{DensityMatrix, Error, Result};

use crate::config::{CommandName, ExperimentConfig};
use crate::parse::{self, Noise};

pub const SCHEMA: u32 = 1;
const PASS_TOLERANCE: f64 = 1e-9;

/// What a command produced. `main` is printed when no output path is set;
/// `files` are (suffix, contents) pairs written next to the output path.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub main: String,
    pub files: Vec<(String, String)>,
    /// False when a verification check failed (nonzero exit).
    pub success: bool,
}

impl Artifacts {
    fn ok(main: String) -> Self {
        Artifacts { main, files: Vec::new(), success: true }
    }
}

pub fn execute(cfg: &ExperimentConfig) -> Result<Artifacts> {
    match cfg.command.ok_or_else(|| Error::InvalidArgument("no command".into()))? {
        CommandName::Verify => verify(cfg),
        CommandName::Compile => compile(cfg),
        CommandName::Gates => gates(cfg),
        CommandName::Qec => qec(cfg),
        CommandName::Bell => bell(cfg),
        CommandName::Tomo => tomo(cfg),
    }
}

/// Shortest round-trip decimal, with floating-point dust below 1e-14
/// printed as 0.
pub fn num(x: f64) -> String {
    if x.abs() < 1e-14 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

fn family(cfg: &ExperimentConfig) -> Result<GraphFamily> {
    let name = cfg.family.as_deref().ok_or_else(|| Error::InvalidArgument("a graph family is required".into()))?;
    GraphFamily::parse(name, cfg.size)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

fn noisy_state(g: &GraphSpec, noise: Option<&Noise>) -> Result<DensityMatrix> {
    let mut rho = build_graph_state(g).to_density();
    if let Some(n) = noise {
        for q in 0..g.num_vertices() {
            rho = rho.apply_channel(&n.channel(q))?;
        }
    }
    Ok(rho)
}

fn noise(cfg: &ExperimentConfig) -> Result<Option<Noise>> {
    cfg.noise.as_deref().map(Noise::parse).transpose()
}

fn verify(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let fam = family(cfg)?;
    let seq = match &cfg.pulses {
        Some(path) => PulseSequence::parse(&std::fs::read_to_string(path)?)?,
        None => compile_graph(fam)?,
    };
    let g = GraphSpec::from_family(fam)?;
    if seq.num_qubits != g.num_vertices() {
        return Err(Error::DimensionMismatch { expected: g.num_vertices(), got: seq.num_qubits });
    }
    let raw = seq.run()?;
    let table = CorrectionTable::for_family(fam)?;
    let corrected = table.apply(&raw)?;
    let fidelity = corrected.fidelity(&build_graph_state(&g))?;
    let stabilizers: Vec<_> = g
        .generators()
        .iter()
        .map(|k| Ok(json!({ "generator": k.to_string(), "expectation": num(k.expectation(&corrected)?.re) })))
        .collect::<Result<_>>()?;
    let min_stab = g
        .generators()
        .iter()
        .map(|k| k.expectation(&corrected).map(|v| v.re))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let pass = fidelity >= 1.0 - PASS_TOLERANCE && min_stab >= 1.0 - PASS_TOLERANCE;
    let report = json!({
        "schema": SCHEMA,
        "command": "verify",
        "family": fam.label(),
        "qubits": g.num_vertices(),
        "pulses": seq.len(),
        "correction": table.to_strings(),
        "fidelity": fidelity,
        "stabilizers": stabilizers,
        "pass": pass,
    });
    Ok(Artifacts { main: to_json(&report), files: Vec::new(), success: pass })
}

fn compile(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let fam = family(cfg)?;
    let seq = compile_graph(fam)?;
    Ok(Artifacts::ok(format!("# schema={SCHEMA}\n# {}\n{}", fam.label(), seq.to_text())))
}

fn pattern_mode(cfg: &ExperimentConfig) -> Result<PatternMode> {
    match cfg.mode.as_deref().unwrap_or("branch") {
        "branch" => Ok(PatternMode::Branch),
        "sample" => {
            let shots = cfg.shots.unwrap_or(1000) as usize;
            if shots == 0 {
                return Err(Error::InvalidArgument("shots must be at least 1".into()));
            }
            Ok(PatternMode::Sample { seed: cfg.seed(), shots })
        }
        other => Err(Error::InvalidArgument(format!("mode {other:?} must be branch or sample"))),
    }
}

fn gates(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let mode = pattern_mode(cfg)?;
    let mode_name = cfg.mode.as_deref().unwrap_or("branch");
    if cfg.angles.is_empty() {
        return Err(Error::InvalidArgument("at least one --angles setting is required".into()));
    }
    let mut out = format!("# schema={SCHEMA}\n");
    match cfg.pattern.as_deref().unwrap_or("single") {
        "single" => {
            out.push_str("pattern,alpha,beta,gamma,mode,x,y,z,purity,oracle_fidelity\n");
            for text in &cfg.angles {
                let a = parse::angles(text)?;
                if a.len() != 3 {
                    return Err(Error::InvalidArgument(format!("single-qubit pattern needs 3 angles, got {text:?}")));
                }
                let r = run_single_qubit_pattern(a[0], a[1], a[2], mode)?;
                let b = bloch_vector(&r.output)?;
                let f = r.output.fidelity(&oracle_single_output(a[0], a[1], a[2]))?;
                let _ = writeln!(
                    out,
                    "single,{},{},{},{mode_name},{},{},{},{},{}",
                    num(a[0]),
                    num(a[1]),
                    num(a[2]),
                    num(b[0]),
                    num(b[1]),
                    num(b[2]),
                    num(r.output.purity()),
                    num(f)
                );
            }
        }
        "two" => {
            out.push_str("pattern,alpha,beta,mode,tangle,purity,oracle_fidelity");
            for r in 0..4 {
                for c in 0..4 {
                    let _ = write!(out, ",rho_{r}{c}_re,rho_{r}{c}_im");
                }
            }
            out.push('\n');
            for text in &cfg.angles {
                let a = parse::angles(text)?;
                if a.len() != 2 {
                    return Err(Error::InvalidArgument(format!("two-qubit pattern needs 2 angles, got {text:?}")));
                }
                let r = run_two_qubit_pattern(a[0], a[1], mode)?;
                let f = r.output.fidelity(&oracle_two_output(a[0], a[1]))?;
                let _ = write!(
                    out,
                    "two,{},{},{mode_name},{},{},{}",
                    num(a[0]),
                    num(a[1]),
                    num(r.output.tangle()?),
                    num(r.output.purity()),
                    num(f)
                );
                let m = r.output.matrix();
                for i in 0..4 {
                    for j in 0..4 {
                        let _ = write!(out, ",{},{}", num(m[(i, j)].re), num(m[(i, j)].im));
                    }
                }
                out.push('\n');
            }
        }
        other => return Err(Error::InvalidArgument(format!("pattern {other:?} must be single or two"))),
    }
    Ok(Artifacts::ok(out))
}

fn qec(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let ns = if cfg.n.is_empty() { vec![1, 3, 5] } else { cfg.n.clone() };
    let targets = ErrorTargets::parse(cfg.targets.as_deref().unwrap_or("all"))?;
    let grid = parse::grid(cfg.p_grid.as_deref().unwrap_or("0:1:21"))?;
    let set = InputSet::from_count(cfg.inputs.unwrap_or(4))?;
    let mut out = format!("# schema={SCHEMA}\nn,targets,inputs,p,input,fidelity,atf,atf_closed_form\n");
    let mut sorted = ns.clone();
    sorted.sort_unstable();
    sorted.dedup();
    for n in sorted {
        let t = targets.resolve(n)?.len();
        let report = atf_sweep(n, &grid, &targets, set)?;
        for pt in &report.points {
            let closed = ideal_atf_curve_targets(n, t, pt.p, set)?;
            for (input, f) in &pt.fidelities {
                let _ = writeln!(
                    out,
                    "{n},{targets},{},{},{input},{},{},{}",
                    set.len(),
                    num(pt.p),
                    num(*f),
                    num(pt.average),
                    num(closed)
                );
            }
        }
    }
    Ok(Artifacts::ok(out))
}

fn estimate_json(e: &McEstimate) -> serde_json::Value {
    json!({ "mean": e.mean, "std": e.std, "trials": e.samples.len() })
}

fn bell(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let fam = family(cfg)?;
    let g = GraphSpec::from_family(fam)?;
    let bound = lhv_bound(&g)?;
    let noise = noise(cfg)?;
    let rho = noisy_state(&g, noise.as_ref())?;
    let value = bell_value(&rho, &g)?;
    let mut report = json!({
        "schema": SCHEMA,
        "command": "bell",
        "family": fam.label(),
        "qubits": g.num_vertices(),
        "lhv_bound": bound,
        "noise": cfg.noise,
        "expectation": value,
        "violated": value > bound,
    });
    if let Some(shots) = cfg.shots {
        let settings = MeasurementSettings::for_bell(&g, shots)?;
        let counts = sample_counts(&rho, &settings, cfg.seed())?;
        let estimate = bell_from_counts(&counts, &g)?;
        let trials = cfg.trials.unwrap_or(100);
        let mc = mc_bell_from_counts(&counts, &g, trials, cfg.seed().wrapping_add(1))?;
        report["finite_shot"] = json!({
            "shots_per_setting": shots,
            "seed": cfg.seed(),
            "settings": settings.settings.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "estimate": estimate,
            "error": estimate_json(&mc),
            "violated": estimate > bound,
        });
    }
    Ok(Artifacts::ok(to_json(&report)))
}

fn rho_csv(rho: &DensityMatrix) -> String {
    let mut s = format!("# schema={SCHEMA}\nrow,col,re,im\n");
    let m = rho.matrix();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let _ = writeln!(s, "{i},{j},{},{}", num(m[(i, j)].re), num(m[(i, j)].im));
        }
    }
    s
}

fn counts_csv(counts: &CountsTable) -> Result<String> {
    let mut buf = format!("# schema={SCHEMA}\n").into_bytes();
    counts.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf).expect("ascii csv"))
}

fn tomo(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let fam = family(cfg)?;
    let g = GraphSpec::from_family(fam)?;
    let n = g.num_vertices();
    let shots = cfg.shots.unwrap_or(1000);
    let trials = cfg.trials.unwrap_or(20);
    let seed = cfg.seed();
    let noise = noise(cfg)?;
    let rho = noisy_state(&g, noise.as_ref())?;
    let bound = lhv_bound(&g).ok();
    let target = build_graph_state(&g);

    if cfg.bell_only {
        let settings = MeasurementSettings::for_bell(&g, shots)?;
        let counts = if cfg.exact { exact_counts(&rho, &settings)? } else { sample_counts(&rho, &settings, seed)? };
        let estimate = bell_from_counts(&counts, &g)?;
        let mut report = json!({
            "schema": SCHEMA,
            "command": "tomo",
            "mode": "bell-only",
            "family": fam.label(),
            "qubits": n,
            "settings": settings.settings.len(),
            "shots_per_setting": shots,
            "seed": seed,
            "noise": cfg.noise,
            "exact": cfg.exact,
            "bell": estimate,
            "lhv_bound": bound,
            "violated": bound.map(|b| estimate > b),
        });
        if !cfg.exact {
            report["bell_error"] = estimate_json(&mc_bell_from_counts(&counts, &g, trials, seed.wrapping_add(1))?);
        }
        return Ok(Artifacts { main: to_json(&report), files: vec![("_counts.csv".into(), counts_csv(&counts)?)], success: true });
    }

    if n > MAX_FULL_TOMOGRAPHY_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "full tomography of {n} qubits needs {} settings, which is impractical (limit {MAX_FULL_TOMOGRAPHY_QUBITS} qubits); use --bell-only",
            3usize.pow(n as u32)
        )));
    }
    let settings = MeasurementSettings::full(n, shots)?;
    let counts = if cfg.exact { exact_counts(&rho, &settings)? } else { sample_counts(&rho, &settings, seed)? };
    let rec = mle_reconstruct(&counts)?;
    let fidelity = rec.rho.fidelity(&target)?;
    let purity = rec.rho.purity();
    let bell = bell_value(&rec.rho, &g)?;
    let tangle = if n == 2 { Some(rec.rho.tangle()?) } else { None };
    let mut report = json!({
        "schema": SCHEMA,
        "command": "tomo",
        "mode": "full",
        "family": fam.label(),
        "qubits": n,
        "settings": settings.settings.len(),
        "shots_per_setting": shots,
        "seed": seed,
        "noise": cfg.noise,
        "exact": cfg.exact,
        "mle": { "iterations": rec.iterations, "converged": rec.converged, "log_likelihood": rec.log_likelihood },
        "fidelity": fidelity,
        "purity": purity,
        "tangle": tangle,
        "bell": bell,
        "lhv_bound": bound,
        "violated": bound.map(|b| bell > b),
    });
    if !cfg.exact {
        let mut functionals = vec![Functional::Fidelity(target.clone()), Functional::Purity, Functional::BellExpectation(g.clone())];
        if n == 2 {
            functionals.push(Functional::Tangle);
        }
        let est = mc_error_bars(&counts, trials, &functionals, seed.wrapping_add(1), &MleOptions::default())?;
        report["errors"] = json!({
            "fidelity": estimate_json(&est[0]),
            "purity": estimate_json(&est[1]),
            "bell": estimate_json(&est[2]),
            "tangle": est.get(3).map(estimate_json),
        });
    }
    Ok(Artifacts {
        main: to_json(&report),
        files: vec![("_rho.csv".into(), rho_csv(&rec.rho)), ("_counts.csv".into(), counts_csv(&counts)?)],
        success: true,
    })
}
