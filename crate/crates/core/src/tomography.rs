//! Pauli-setting tomography: finite-shot simulation, maximum-likelihood
//! reconstruction, Monte Carlo error bars and Bell estimates from counts.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::bell::bell_value;
use crate::error::{Error, Result};
use crate::graph::{stabilizer_group, GraphSpec};
use crate::linalg::{self, Matrix};
use crate::pauli::{Pauli, PauliString};
use crate::state::{DensityMatrix, StateVector};

/// Full tomography is refused above this many qubits.
pub const MAX_FULL_TOMOGRAPHY_QUBITS: usize = 6;

/// One local Pauli basis per qubit, e.g. `XZY`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Setting(Vec<Pauli>);

impl Setting {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() || letters.contains(&Pauli::I) {
            return Err(Error::InvalidArgument("settings use X, Y, Z on every qubit".into()));
        }
        Ok(Setting(letters))
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.0
    }

    pub fn num_qubits(&self) -> usize {
        self.0.len()
    }

    /// Per-qubit unitary mapping the +1 eigenstate to |0⟩.
    fn rotations(&self) -> Vec<Matrix> {
        self.0
            .iter()
            .map(|p| match p {
                Pauli::X => linalg::hadamard(),
                Pauli::Y => linalg::hadamard() * linalg::phase(-std::f64::consts::FRAC_PI_2),
                _ => linalg::identity(2),
            })
            .collect()
    }

    /// Does this setting measure every non-identity letter of `p`?
    pub fn covers(&self, p: &PauliString) -> bool {
        p.letters().iter().zip(&self.0).all(|(a, b)| *a == Pauli::I || a == b)
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for Setting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .trim()
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::InvalidArgument(format!("bad setting {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Setting::new(letters)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSettings {
    pub settings: Vec<Setting>,
    pub shots: u64,
}

impl MeasurementSettings {
    pub fn new(settings: Vec<Setting>, shots: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidArgument("shots must be at least 1".into()));
        }
        let first = settings.first().ok_or_else(|| Error::InvalidArgument("no settings".into()))?;
        let n = first.num_qubits();
        let mut seen = HashSet::new();
        for s in &settings {
            if s.num_qubits() != n {
                return Err(Error::DimensionMismatch { expected: n, got: s.num_qubits() });
            }
            if !seen.insert(s.clone()) {
                return Err(Error::InvalidArgument(format!("setting {s} listed twice")));
            }
        }
        Ok(MeasurementSettings { settings, shots })
    }

    /// All 3^n settings in lexicographic X < Y < Z order.
    pub fn full(n: usize, shots: u64) -> Result<Self> {
        if n > MAX_FULL_TOMOGRAPHY_QUBITS {
            return Err(Error::TooManyQubits { requested: n, limit: MAX_FULL_TOMOGRAPHY_QUBITS });
        }
        let letters = [Pauli::X, Pauli::Y, Pauli::Z];
        let settings = (0..3usize.pow(n as u32))
            .map(|mut k| {
                let mut v = vec![Pauli::X; n];
                for q in (0..n).rev() {
                    v[q] = letters[k % 3];
                    k /= 3;
                }
                Setting(v)
            })
            .collect();
        Self::new(settings, shots)
    }

    /// Greedy small set of settings covering every stabilizer of `g`.
    pub fn for_bell(g: &GraphSpec, shots: u64) -> Result<Self> {
        Self::new(bell_settings(g)?, shots)
    }

    pub fn num_qubits(&self) -> usize {
        self.settings[0].num_qubits()
    }
}

/// Outcome counts per setting. Counts are real so that exact probabilities
/// can stand in for infinite statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsTable {
    num_qubits: usize,
    data: BTreeMap<Setting, Vec<f64>>,
}

impl CountsTable {
    pub fn new(num_qubits: usize) -> Self {
        CountsTable { num_qubits, data: BTreeMap::new() }
    }

    pub fn insert(&mut self, setting: Setting, counts: Vec<f64>) -> Result<()> {
        if setting.num_qubits() != self.num_qubits || counts.len() != 1 << self.num_qubits {
            return Err(Error::DimensionMismatch { expected: 1 << self.num_qubits, got: counts.len() });
        }
        if counts.iter().any(|&c| c < 0.0 || !c.is_finite()) {
            return Err(Error::InvalidArgument(format!("negative or non-finite count for {setting}")));
        }
        self.data.insert(setting, counts);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn settings(&self) -> impl Iterator<Item = &Setting> {
        self.data.keys()
    }

    pub fn get(&self, s: &Setting) -> Option<&[f64]> {
        self.data.get(s).map(|v| v.as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Setting, &Vec<f64>)> {
        self.data.iter()
    }

    pub fn total(&self, s: &Setting) -> f64 {
        self.get(s).map(|c| c.iter().sum()).unwrap_or(0.0)
    }

    /// Normalized outcome frequencies of one setting.
    pub fn frequencies(&self, s: &Setting) -> Option<Vec<f64>> {
        let c = self.get(s)?;
        let t: f64 = c.iter().sum();
        if t <= 0.0 {
            return None;
        }
        Some(c.iter().map(|x| x / t).collect())
    }

    /// CSV with header `setting,outcome,count`; outcome bit strings list
    /// qubit 0 first.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["setting", "outcome", "count"])?;
        let n = self.num_qubits;
        for (s, counts) in &self.data {
            for (o, c) in counts.iter().enumerate() {
                wr.write_record([s.to_string(), format!("{o:0n$b}"), format!("{c}")])?;
            }
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads the CSV format of [`CountsTable::write_csv`]; `#` lines are
    /// ignored and missing outcomes count as zero.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r);
        let headers = rd.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Parse { line: 1, msg: format!("missing column {name:?}") })
        };
        let (cs, co, cc) = (col("setting")?, col("outcome")?, col("count")?);
        let mut table: Option<CountsTable> = None;
        for (i, rec) in rd.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let setting: Setting = rec[cs].parse().map_err(|_| Error::Parse { line, msg: format!("bad setting {:?}", &rec[cs]) })?;
            let n = setting.num_qubits();
            let t = table.get_or_insert_with(|| CountsTable::new(n));
            if n != t.num_qubits || rec[co].len() != n {
                return Err(Error::Parse { line, msg: "inconsistent register size".into() });
            }
            let o = usize::from_str_radix(&rec[co], 2).map_err(|_| Error::Parse { line, msg: format!("bad outcome {:?}", &rec[co]) })?;
            let c: f64 = rec[cc].parse().map_err(|_| Error::Parse { line, msg: format!("bad count {:?}", &rec[cc]) })?;
            if c < 0.0 || !c.is_finite() {
                return Err(Error::Parse { line, msg: format!("bad count {c}") });
            }
            t.data.entry(setting).or_insert_with(|| vec![0.0; 1 << n])[o] += c;
        }
        table.ok_or(Error::Parse { line: 1, msg: "no counts".into() })
    }
}

/// Outcome probabilities of one setting (bit 0 = +1 eigenvalue).
pub fn setting_probabilities(rho: &DensityMatrix, setting: &Setting) -> Result<Vec<f64>> {
    if setting.num_qubits() != rho.num_qubits() {
        return Err(Error::DimensionMismatch { expected: rho.num_qubits(), got: setting.num_qubits() });
    }
    Ok(rotate(rho, &setting.rotations()).probabilities())
}

fn rotate(rho: &DensityMatrix, rots: &[Matrix]) -> DensityMatrix {
    let mut r = rho.clone();
    for (q, u) in rots.iter().enumerate() {
        if u != &linalg::identity(2) {
            r.sandwich_in_place(u, &[q]);
        }
    }
    r
}

/// Counts equal to shots × exact probability.
pub fn exact_counts(rho: &DensityMatrix, settings: &MeasurementSettings) -> Result<CountsTable> {
    let mut t = CountsTable::new(rho.num_qubits());
    for s in &settings.settings {
        let p = setting_probabilities(rho, s)?;
        // rounding noise on forbidden outcomes would read as observed events
        let counts = p.iter().map(|&x| if x < 1e-12 { 0.0 } else { x * settings.shots as f64 }).collect();
        t.insert(s.clone(), counts)?;
    }
    Ok(t)
}

fn multinomial(probs: &[f64], shots: u64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut left = shots;
    let mut mass: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    let mut out = vec![0.0; probs.len()];
    for (k, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        let p = p.max(0.0);
        let q = if k + 1 == probs.len() || mass <= 0.0 { 1.0 } else { (p / mass).clamp(0.0, 1.0) };
        let draw = Binomial::new(left, q).expect("valid binomial").sample(rng);
        out[k] = draw as f64;
        left -= draw;
        mass -= p;
    }
    out
}

/// Multinomial draws from the exact outcome distribution of every setting.
pub fn sample_counts(rho: &DensityMatrix, settings: &MeasurementSettings, seed: u64) -> Result<CountsTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = CountsTable::new(rho.num_qubits());
    for s in &settings.settings {
        let p = setting_probabilities(rho, s)?;
        t.insert(s.clone(), multinomial(&p, settings.shots, &mut rng))?;
    }
    Ok(t)
}

fn pauli_index_letters(mut idx: usize, n: usize) -> Vec<Pauli> {
    let mut v = vec![Pauli::I; n];
    for q in (0..n).rev() {
        v[q] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][idx % 4];
        idx /= 4;
    }
    v
}

fn letter_code(p: Pauli) -> usize {
    match p {
        Pauli::I => 0,
        Pauli::X => 1,
        Pauli::Y => 2,
        Pauli::Z => 3,
    }
}

/// Pauli index (base 4, qubit 0 most significant) measured by keeping the
/// letters of `s` on the qubits selected by `mask` (bit n-1-q for qubit q).
fn sub_pauli_index(s: &Setting, mask: usize) -> usize {
    let n = s.num_qubits();
    s.letters().iter().enumerate().fold(0, |acc, (q, &p)| {
        let keep = (mask >> (n - 1 - q)) & 1 == 1;
        acc * 4 + if keep { letter_code(p) } else { 0 }
    })
}

/// Number of distinct Pauli operators (identity included) whose expectation
/// the settings determine; 4^n means informationally complete.
pub fn pauli_coverage<'a>(settings: impl IntoIterator<Item = &'a Setting>, n: usize) -> usize {
    let mut seen = vec![false; 1 << (2 * n)];
    for s in settings {
        for mask in 0..1usize << n {
            seen[sub_pauli_index(s, mask)] = true;
        }
    }
    seen.iter().filter(|&&b| b).count()
}

pub fn is_informationally_complete(counts: &CountsTable) -> bool {
    let n = counts.num_qubits();
    pauli_coverage(counts.settings(), n) == 1 << (2 * n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MleInit {
    /// Linear-inversion estimate projected onto the physical states.
    LinearInversion,
    MaximallyMixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    pub max_iterations: usize,
    /// Stop when |ΔL| ≤ tolerance · max(|L|, 1).
    pub tolerance: f64,
    pub init: MleInit,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions { max_iterations: 10_000, tolerance: 1e-10, init: MleInit::LinearInversion }
    }
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub rho: DensityMatrix,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood after the start point and after every iteration.
    pub likelihood_trace: Vec<f64>,
}

struct Data {
    n: usize,
    rotations: Vec<Vec<Matrix>>,
    /// Frequencies normalized over the whole table.
    freqs: Vec<Vec<f64>>,
}

impl Data {
    fn new(counts: &CountsTable) -> Result<Data> {
        let grand: f64 = counts.iter().map(|(_, c)| c.iter().sum::<f64>()).sum();
        if grand <= 0.0 {
            return Err(Error::InvalidArgument("counts table is empty".into()));
        }
        let mut rotations = Vec::new();
        let mut freqs = Vec::new();
        for (s, c) in counts.iter() {
            rotations.push(s.rotations());
            freqs.push(c.iter().map(|x| x / grand).collect());
        }
        Ok(Data { n: counts.num_qubits(), rotations, freqs })
    }

    fn probabilities(&self, rho: &DensityMatrix) -> Vec<Vec<f64>> {
        self.rotations.iter().map(|r| rotate(rho, r).probabilities()).collect()
    }

    fn log_likelihood(&self, probs: &[Vec<f64>]) -> f64 {
        let mut l = 0.0;
        for (f, p) in self.freqs.iter().zip(probs) {
            for (&fi, &pi) in f.iter().zip(p) {
                if fi > 0.0 {
                    if pi <= 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    l += fi * pi.ln();
                }
            }
        }
        l
    }

    /// R = Σ_s U_s† diag(f/p) U_s.
    fn r_operator(&self, probs: &[Vec<f64>]) -> Matrix {
        let d = 1usize << self.n;
        let mut acc = DMatrix::zeros(d, d);
        for ((f, p), rots) in self.freqs.iter().zip(probs).zip(&self.rotations) {
            let diag: Vec<C64> = f
                .iter()
                .zip(p)
                .map(|(&fi, &pi)| C64::new(if fi > 0.0 && pi > 0.0 { fi / pi } else { 0.0 }, 0.0))
                .collect();
            let mut m = DensityMatrix::from_matrix_unchecked(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
                .expect("power-of-two dimension");
            for (q, u) in rots.iter().enumerate() {
                if u != &linalg::identity(2) {
                    m.sandwich_in_place(&u.adjoint(), &[q]);
                }
            }
            acc += m.matrix();
        }
        acc
    }

    /// (1/2^n) Σ_P ⟨P⟩ P, each ⟨P⟩ averaged over the settings that measure it.
    fn linear_inversion(&self, counts: &CountsTable) -> Matrix {
        let n = self.n;
        let np = 1usize << (2 * n);
        let mut sum = vec![0.0; np];
        let mut hits = vec![0usize; np];
        for (s, _) in counts.iter() {
            let f = counts.frequencies(s).unwrap_or_else(|| vec![0.0; 1 << n]);
            for mask in 0..1usize << n {
                let idx = sub_pauli_index(s, mask);
                let e: f64 = f
                    .iter()
                    .enumerate()
                    .map(|(o, &x)| if (o & mask).count_ones() % 2 == 0 { x } else { -x })
                    .sum();
                sum[idx] += e;
                hits[idx] += 1;
            }
        }
        let d = 1usize << n;
        let mut m = DMatrix::zeros(d, d);
        for idx in 0..np {
            if hits[idx] == 0 {
                continue;
            }
            let e = sum[idx] / hits[idx] as f64;
            let p = PauliString::new(0, pauli_index_letters(idx, n));
            for (c, (r, v)) in p.columns().into_iter().enumerate() {
                m[(r, c)] += v * e;
            }
        }
        m / C64::new(d as f64, 0.0)
    }
}

/// Closest density matrix in eigenvalue sense: keep eigenvectors, project
/// the spectrum onto the probability simplex.
pub fn project_to_physical(m: &Matrix) -> DensityMatrix {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mut sorted = vals.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut shift = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cum += v;
        let t = (cum - 1.0) / (k + 1) as f64;
        if v - t > 0.0 {
            shift = t;
        }
    }
    let proj: Vec<C64> = vals.iter().map(|&v| C64::new((v - shift).max(0.0), 0.0)).collect();
    let out = &eig.eigenvectors * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(proj)) * eig.eigenvectors.adjoint();
    let out = (&out + out.adjoint()) * C64::new(0.5, 0.0);
    let tr = out.trace().re;
    DensityMatrix::from_matrix_unchecked(out / C64::new(tr, 0.0)).expect("square power-of-two")
}

fn normalized(m: Matrix) -> DensityMatrix {
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let tr = m.trace().re;
    DensityMatrix::from_matrix_unchecked(m / C64::new(tr, 0.0)).expect("square power-of-two")
}

pub fn mle_reconstruct(counts: &CountsTable) -> Result<ReconstructionResult> {
    mle_reconstruct_with(counts, &MleOptions::default())
}

/// RρR fixed-point iteration. A step that would lower the likelihood is
/// replaced by the diluted map (1+εR)ρ(1+εR) with ε halved until the
/// likelihood does not decrease, so the trace is monotone.
pub fn mle_reconstruct_with(counts: &CountsTable, opts: &MleOptions) -> Result<ReconstructionResult> {
    let n = counts.num_qubits();
    let covered = pauli_coverage(counts.settings(), n);
    if covered != 1 << (2 * n) {
        return Err(Error::InformationallyIncomplete { covered, needed: 1 << (2 * n) });
    }
    let data = Data::new(counts)?;
    let d = 1usize << n;
    let mut rho = match opts.init {
        MleInit::MaximallyMixed => DensityMatrix::maximally_mixed(n),
        MleInit::LinearInversion => project_to_physical(&data.linear_inversion(counts)),
    };
    let mut probs = data.probabilities(&rho);
    if data.log_likelihood(&probs) == f64::NEG_INFINITY {
        // the warm start misses observed outcomes; blend in a little noise
        let delta = 1e-3;
        let mixed = rho.matrix() * C64::new(1.0 - delta, 0.0) + linalg::identity(d) * C64::new(delta / d as f64, 0.0);
        rho = normalized(mixed);
        probs = data.probabilities(&rho);
    }
    let mut ll = data.log_likelihood(&probs);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let r = data.r_operator(&probs);
        let mut candidate = normalized(&r * rho.matrix() * &r);
        let mut cprobs = data.probabilities(&candidate);
        let mut cll = data.log_likelihood(&cprobs);
        let mut eps = 1.0;
        while cll < ll && eps > 1e-12 {
            let g = linalg::identity(d) + &r * C64::new(eps, 0.0);
            candidate = normalized(&g * rho.matrix() * &g);
            cprobs = data.probabilities(&candidate);
            cll = data.log_likelihood(&cprobs);
            eps /= 2.0;
        }
        if cll < ll {
            // no ascent direction left at machine precision
            converged = true;
            iterations -= 1;
            break;
        }
        let change = cll - ll;
        rho = candidate;
        probs = cprobs;
        ll = cll;
        trace.push(ll);
        if change <= opts.tolerance * ll.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    Ok(ReconstructionResult { rho, log_likelihood: ll, iterations, converged, likelihood_trace: trace })
}

/// Quantity evaluated on each Monte Carlo reconstruction.
#[derive(Debug, Clone)]
pub enum Functional {
    Fidelity(StateVector),
    Purity,
    Tangle,
    BellExpectation(GraphSpec),
}

impl Functional {
    pub fn evaluate(&self, rho: &DensityMatrix) -> Result<f64> {
        match self {
            Functional::Fidelity(psi) => rho.fidelity(psi),
            Functional::Purity => Ok(rho.purity()),
            Functional::Tangle => rho.tangle(),
            Functional::BellExpectation(g) => bell_value(rho, g),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation.
    pub std: f64,
    pub samples: Vec<f64>,
}

impl McEstimate {
    fn from_samples(samples: Vec<f64>) -> Self {
        let k = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / k;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
        McEstimate { mean, std: var.sqrt(), samples }
    }
}

fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed ^ (trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Redraw every setting's counts from its empirical frequencies.
pub fn resample_counts(counts: &CountsTable, seed: u64) -> CountsTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = CountsTable::new(counts.num_qubits());
    for (s, c) in counts.iter() {
        let total: f64 = c.iter().sum();
        let shots = total.round() as u64;
        let f: Vec<f64> = c.iter().map(|x| if total > 0.0 { x / total } else { 0.0 }).collect();
        out.data.insert(s.clone(), multinomial(&f, shots, &mut rng));
    }
    out
}

/// Projection-noise error bar: resample counts multinomially around the
/// observed frequencies, reconstruct each trial, evaluate the functional.
/// Trials run in parallel with seeds derived from `seed`.
pub fn mc_error_bar(counts: &CountsTable, trials: usize, functional: &Functional, seed: u64) -> Result<McEstimate> {
    mc_error_bar_with(counts, trials, functional, seed, &MleOptions::default())
}

pub fn mc_error_bar_with(
    counts: &CountsTable,
    trials: usize,
    functional: &Functional,
    seed: u64,
    opts: &MleOptions,
) -> Result<McEstimate> {
    let mut v = mc_error_bars(counts, trials, std::slice::from_ref(functional), seed, opts)?;
    Ok(v.remove(0))
}

/// Several functionals evaluated on the same reconstructions; one estimate
/// per functional, in the order given.
pub fn mc_error_bars(
    counts: &CountsTable,
    trials: usize,
    functionals: &[Functional],
    seed: u64,
    opts: &MleOptions,
) -> Result<Vec<McEstimate>> {
    if trials < 2 {
        return Err(Error::InvalidArgument("need at least two Monte Carlo trials".into()));
    }
    let rows = (0..trials)
        .into_par_iter()
        .map(|t| {
            let resampled = resample_counts(counts, trial_seed(seed, t));
            let rec = mle_reconstruct_with(&resampled, opts)?;
            functionals.iter().map(|f| f.evaluate(&rec.rho)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..functionals.len())
        .map(|k| McEstimate::from_samples(rows.iter().map(|r| r[k]).collect()))
        .collect())
}

/// Same resampling, but the Bell value is estimated directly from counts.
pub fn mc_bell_from_counts(counts: &CountsTable, g: &GraphSpec, trials: usize, seed: u64) -> Result<McEstimate> {
    if trials < 2 {
        return Err(Error::InvalidArgument("need at least two Monte Carlo trials".into()));
    }
    let samples = (0..trials)
        .into_par_iter()
        .map(|t| bell_from_counts(&resample_counts(counts, trial_seed(seed, t)), g))
        .collect::<Result<Vec<f64>>>()?;
    Ok(McEstimate::from_samples(samples))
}

fn support_mask(p: &PauliString) -> usize {
    let n = p.num_qubits();
    p.letters()
        .iter()
        .enumerate()
        .filter(|(_, &l)| l != Pauli::I)
        .map(|(q, _)| 1usize << (n - 1 - q))
        .sum()
}

/// ⟨B⟩ = (1/2^n) Σ_j ⟨s_j⟩, each stabilizer term read from every setting
/// that covers it (averaged when several do).
pub fn bell_from_counts(counts: &CountsTable, g: &GraphSpec) -> Result<f64> {
    let n = g.num_vertices();
    if counts.num_qubits() != n {
        return Err(Error::DimensionMismatch { expected: n, got: counts.num_qubits() });
    }
    let group = stabilizer_group(g)?.group();
    let mut missing = Vec::new();
    let mut acc = 0.0;
    for term in &group {
        if term.is_identity() {
            acc += term.sign().unwrap_or(1.0);
            continue;
        }
        let mask = support_mask(term);
        let mut vals = Vec::new();
        for (s, _) in counts.iter() {
            if s.covers(term) {
                if let Some(f) = counts.frequencies(s) {
                    let e: f64 = f
                        .iter()
                        .enumerate()
                        .map(|(o, &x)| if (o & mask).count_ones().is_multiple_of(2) { x } else { -x })
                        .sum();
                    vals.push(e);
                }
            }
        }
        if vals.is_empty() {
            let fill: String = term.letters().iter().map(|&p| if p == Pauli::I { 'Z' } else { p.as_char() }).collect();
            if !missing.contains(&fill) {
                missing.push(fill);
            }
            continue;
        }
        let sign = term.sign().ok_or_else(|| Error::InvalidArgument("non-Hermitian stabilizer".into()))?;
        acc += sign * vals.iter().sum::<f64>() / vals.len() as f64;
    }
    if !missing.is_empty() {
        return Err(Error::MissingSettings(missing));
    }
    Ok(acc / group.len() as f64)
}

/// Greedy set cover of the non-identity stabilizers by full settings.
pub fn bell_settings(g: &GraphSpec) -> Result<Vec<Setting>> {
    let n = g.num_vertices();
    let terms: Vec<PauliString> = stabilizer_group(g)?.group().into_iter().filter(|t| !t.is_identity()).collect();
    let letters = [Pauli::X, Pauli::Y, Pauli::Z];
    let candidates: Vec<Setting> = (0..3usize.pow(n as u32))
        .map(|mut k| {
            let mut v = vec![Pauli::X; n];
            for q in (0..n).rev() {
                v[q] = letters[k % 3];
                k /= 3;
            }
            Setting(v)
        })
        .collect();
    let mut uncovered: Vec<bool> = vec![true; terms.len()];
    let mut chosen = Vec::new();
    while uncovered.iter().any(|&u| u) {
        let best = candidates
            .iter()
            .max_by_key(|s| {
                // ties go to the lexicographically first candidate
                let gain = terms.iter().zip(&uncovered).filter(|(t, &u)| u && s.covers(t)).count();
                (gain, std::cmp::Reverse((*s).clone()))
            })
            .expect("candidates exist")
            .clone();
        for (t, u) in terms.iter().zip(uncovered.iter_mut()) {
            if best.covers(t) {
                *u = false;
            }
        }
        chosen.push(best);
    }
    chosen.sort();
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_settings_count_and_guard() {
        assert_eq!(MeasurementSettings::full(3, 10).unwrap().settings.len(), 27);
        assert!(matches!(MeasurementSettings::full(7, 10), Err(Error::TooManyQubits { .. })));
    }

    #[test]
    fn setting_parse() {
        assert_eq!("XZY".parse::<Setting>().unwrap().to_string(), "XZY");
        assert!("XIZ".parse::<Setting>().is_err());
    }

    #[test]
    fn zero_state_z_counts() {
        let rho = StateVector::zero(1).to_density();
        let s = MeasurementSettings::new(vec!["Z".parse().unwrap()], 100).unwrap();
        let c = sample_counts(&rho, &s, 1).unwrap();
        assert_eq!(c.get(&"Z".parse().unwrap()).unwrap(), &[100.0, 0.0]);
    }

    #[test]
    fn y_setting_maps_plus_i_to_outcome_zero() {
        let plus_i = StateVector::from_amplitudes(vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)]).unwrap();
        let p = setting_probabilities(&plus_i.to_density(), &"Y".parse().unwrap()).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn coverage_of_full_set() {
        let s = MeasurementSettings::full(2, 1).unwrap();
        assert_eq!(pauli_coverage(&s.settings, 2), 16);
        let z_only = ["ZZ".parse::<Setting>().unwrap()];
        assert_eq!(pauli_coverage(&z_only, 2), 4);
    }

    #[test]
    fn simplex_projection() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(1.2, 0.0),
            C64::new(-0.2, 0.0),
        ]));
        let r = project_to_physical(&m);
        assert!((r.matrix()[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!(r.matrix()[(1, 1)].re.abs() < 1e-14);
    }
}
