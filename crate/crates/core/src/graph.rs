//! Graphs, graph states, stabilizers and local complementation.

use serde::{Deserialize, Serialize};
use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::pauli::{Pauli, PauliString};
use crate::state::{StateVector, MAX_QUBITS};

/// Named graphs used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GraphFamily {
    /// Four-qubit linear cluster.
    Lc4,
    /// Four-qubit ring (box) cluster.
    Rc4,
    /// Error-correction graph: A and B joined to every codeword qubit C_i.
    Ec(usize),
    /// Star graph centred on qubit 0 (local-Clifford equivalent to GHZ).
    Ghz(usize),
    Custom,
}

impl GraphFamily {
    pub fn label(&self) -> String {
        match self {
            GraphFamily::Lc4 => "LC4".into(),
            GraphFamily::Rc4 => "RC4".into(),
            GraphFamily::Ec(n) => format!("EC{n}"),
            GraphFamily::Ghz(n) => format!("GHZ{n}"),
            GraphFamily::Custom => "custom".into(),
        }
    }

    /// Parse labels such as `LC4`, `RC4`, `EC3`, `GHZ5`, or a family name plus
    /// a separate size (`EC`, `3`).
    pub fn parse(name: &str, size: Option<usize>) -> Result<GraphFamily> {
        let upper = name.trim().to_ascii_uppercase();
        let split = upper.find(|c: char| c.is_ascii_digit()).unwrap_or(upper.len());
        let (head, digits) = upper.split_at(split);
        let inline: Option<usize> = if digits.is_empty() {
            None
        } else {
            Some(digits.parse().map_err(|_| Error::UnsupportedFamily(name.to_string()))?)
        };
        let size = match (inline, size) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::InvalidArgument(format!("conflicting sizes in {name} and {b}")))
            }
            (Some(a), _) => Some(a),
            (None, b) => b,
        };
        match (head, size) {
            ("LC", Some(4)) | ("LC", None) => Ok(GraphFamily::Lc4),
            ("RC", Some(4)) | ("RC", None) => Ok(GraphFamily::Rc4),
            ("EC", Some(n)) if n >= 1 => Ok(GraphFamily::Ec(n)),
            ("GHZ", Some(n)) if n >= 2 => Ok(GraphFamily::Ghz(n)),
            _ => Err(Error::UnsupportedFamily(name.to_string())),
        }
    }

    pub fn num_qubits(&self) -> Option<usize> {
        match *self {
            GraphFamily::Lc4 | GraphFamily::Rc4 => Some(4),
            GraphFamily::Ec(n) => Some(n + 2),
            GraphFamily::Ghz(n) => Some(n),
            GraphFamily::Custom => None,
        }
    }
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
    family: Option<GraphFamily>,
}

impl GraphSpec {
    /// Edges are stored as sorted pairs (a < b), in sorted order.
    pub fn new(num_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut norm = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on vertex {a}")));
            }
            if a >= num_vertices || b >= num_vertices {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) outside {num_vertices} vertices")));
            }
            let e = (a.min(b), a.max(b));
            if norm.contains(&e) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({}, {})", e.0, e.1)));
            }
            norm.push(e);
        }
        norm.sort_unstable();
        Ok(GraphSpec { num_vertices, edges: norm, family: None })
    }

    pub fn with_family(mut self, family: GraphFamily) -> Self {
        self.family = Some(family);
        self
    }

    pub fn from_family(family: GraphFamily) -> Result<Self> {
        match family {
            GraphFamily::Lc4 => Ok(Self::linear(4).with_family(family)),
            GraphFamily::Rc4 => Ok(Self::ring(4).with_family(family)),
            GraphFamily::Ec(n) => Self::ec(n),
            GraphFamily::Ghz(n) => Self::ghz(n),
            GraphFamily::Custom => Err(Error::UnsupportedFamily("custom".into())),
        }
    }

    pub fn linear(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        GraphSpec::new(n, &edges).expect("valid chain")
    }

    pub fn ring(n: usize) -> Self {
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        if n > 2 {
            edges.push((0, n - 1));
        }
        GraphSpec::new(n, &edges).expect("valid ring")
    }

    pub fn star(n: usize, center: usize) -> Self {
        let edges: Vec<_> = (0..n).filter(|&v| v != center).map(|v| (center, v)).collect();
        GraphSpec::new(n, &edges).expect("valid star")
    }

    pub fn lc4() -> Self {
        Self::from_family(GraphFamily::Lc4).unwrap()
    }

    pub fn rc4() -> Self {
        Self::from_family(GraphFamily::Rc4).unwrap()
    }

    /// A = 0, C_i = i, B = n + 1.
    pub fn ec(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("EC graphs need at least one codeword qubit".into()));
        }
        let mut edges = Vec::with_capacity(2 * n);
        for i in 1..=n {
            edges.push((0, i));
            edges.push((i, n + 1));
        }
        Ok(GraphSpec::new(n + 2, &edges)?.with_family(GraphFamily::Ec(n)))
    }

    pub fn ghz(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("GHZ graphs need at least two qubits".into()));
        }
        Ok(Self::star(n, 0).with_family(GraphFamily::Ghz(n)))
    }

    /// Star on n + 1 vertices (centre 0) with a pendant vertex n + 1 hanging
    /// off leaf 1: a GHZ graph joined by one edge to a single vertex.
    pub fn ec_lc(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("need n >= 1".into()));
        }
        let mut edges: Vec<_> = (1..=n).map(|v| (0, v)).collect();
        edges.push((1, n + 1));
        GraphSpec::new(n + 2, &edges)
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn family(&self) -> Option<GraphFamily> {
        self.family
    }

    pub fn label(&self) -> String {
        self.family.map(|f| f.label()).unwrap_or_else(|| "custom".into())
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| if a == v { Some(b) } else if b == v { Some(a) } else { None })
            .collect();
        out.sort_unstable();
        out
    }

    /// Toggle every edge inside the neighbourhood of `v`.
    pub fn local_complement(&self, v: usize) -> GraphSpec {
        let nb = self.neighbors(v);
        let mut set: HashSet<(usize, usize)> = self.edges.iter().copied().collect();
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                if !set.remove(&(a, b)) {
                    set.insert((a, b));
                }
            }
        }
        let edges: Vec<_> = set.into_iter().collect();
        GraphSpec::new(self.num_vertices, &edges).expect("local complement keeps validity")
    }

    /// Same graph with vertex v renamed to perm[v].
    pub fn relabel(&self, perm: &[usize]) -> Result<GraphSpec> {
        if perm.len() != self.num_vertices {
            return Err(Error::DimensionMismatch { expected: self.num_vertices, got: perm.len() });
        }
        let edges: Vec<_> = self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        GraphSpec::new(self.num_vertices, &edges)
    }

    /// A permutation p with self.relabel(p) == other, if one exists.
    pub fn isomorphism_to(&self, other: &GraphSpec) -> Option<Vec<usize>> {
        let n = self.num_vertices;
        if n != other.num_vertices || self.edges.len() != other.edges.len() {
            return None;
        }
        let deg_a: Vec<usize> = (0..n).map(|v| self.neighbors(v).len()).collect();
        let deg_b: Vec<usize> = (0..n).map(|v| other.neighbors(v).len()).collect();
        let mut perm = vec![usize::MAX; n];
        let mut used = vec![false; n];
        fn extend(
            v: usize,
            g: &GraphSpec,
            h: &GraphSpec,
            deg_a: &[usize],
            deg_b: &[usize],
            perm: &mut Vec<usize>,
            used: &mut Vec<bool>,
        ) -> bool {
            let n = perm.len();
            if v == n {
                return true;
            }
            for w in 0..n {
                if used[w] || deg_a[v] != deg_b[w] {
                    continue;
                }
                let ok = (0..v).all(|u| g.has_edge(u, v) == h.has_edge(perm[u], w));
                if !ok {
                    continue;
                }
                perm[v] = w;
                used[w] = true;
                if extend(v + 1, g, h, deg_a, deg_b, perm, used) {
                    return true;
                }
                used[w] = false;
            }
            false
        }
        if extend(0, self, other, &deg_a, &deg_b, &mut perm, &mut used) {
            Some(perm)
        } else {
            None
        }
    }

    /// Stabilizer generators K_a = X_a Π_{b∈N(a)} Z_b.
    pub fn generators(&self) -> Vec<PauliString> {
        (0..self.num_vertices)
            .map(|a| {
                let mut letters = vec![Pauli::I; self.num_vertices];
                letters[a] = Pauli::X;
                for b in self.neighbors(a) {
                    letters[b] = Pauli::Z;
                }
                PauliString::new(0, letters)
            })
            .collect()
    }

    /// Text format: vertex count on the first line, then one `a b` pair per
    /// line. Blank lines and `#` comments are ignored.
    pub fn parse_edge_list(text: &str) -> Result<GraphSpec> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (ln, first) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty graph file".into() })?;
        let n: usize = first
            .parse()
            .map_err(|_| Error::Parse { line: ln, msg: format!("expected vertex count, got {first:?}") })?;
        let mut edges = Vec::new();
        for (ln, l) in lines {
            let parts: Vec<&str> = l.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::Parse { line: ln, msg: format!("expected `a b`, got {l:?}") });
            }
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::Parse { line: ln, msg: format!("bad vertex {s:?}") })
            };
            edges.push((parse(parts[0])?, parse(parts[1])?));
        }
        GraphSpec::new(n, &edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{}\n", self.num_vertices);
        for (a, b) in &self.edges {
            s.push_str(&format!("{a} {b}\n"));
        }
        s
    }

    pub fn read_edge_list(path: &Path) -> Result<GraphSpec> {
        Self::parse_edge_list(&std::fs::read_to_string(path)?)
    }
}

/// CZ-construction graph state: Π_{edges} CZ |+⟩^⊗n, computed directly as
/// amplitudes (-1)^{#edges inside the support}/√2^n.
pub fn build_graph_state(g: &GraphSpec) -> StateVector {
    let n = g.num_vertices();
    assert!(n <= MAX_QUBITS, "graph too large for dense simulation");
    let amp = (1.0 / (1u64 << n) as f64).sqrt();
    let masks: Vec<usize> = g
        .edges()
        .iter()
        .map(|&(a, b)| (1usize << (n - 1 - a)) | (1usize << (n - 1 - b)))
        .collect();
    let amps = (0..1usize << n)
        .map(|i| {
            let parity = masks.iter().filter(|&&m| i & m == m).count() % 2;
            num_complex::Complex64::new(if parity == 0 { amp } else { -amp }, 0.0)
        })
        .collect();
    StateVector::from_amplitudes(amps).expect("non-empty")
}

/// The generators and the full 2^n-element group they generate.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerSet {
    pub generators: Vec<PauliString>,
}

impl StabilizerSet {
    pub fn num_qubits(&self) -> usize {
        self.generators.len()
    }

    /// Element for a subset of generators (bit a of `mask` selects K_a).
    pub fn element(&self, mask: usize) -> PauliString {
        let n = self.num_qubits();
        let mut acc = PauliString::identity(n);
        for (a, k) in self.generators.iter().enumerate() {
            if mask >> a & 1 == 1 {
                acc = &acc * k;
            }
        }
        acc
    }

    /// All 2^n products, ordered by generator subset mask.
    pub fn group(&self) -> Vec<PauliString> {
        (0..1usize << self.num_qubits()).map(|m| self.element(m)).collect()
    }
}

pub fn stabilizer_group(g: &GraphSpec) -> Result<StabilizerSet> {
    if g.num_vertices() > MAX_QUBITS {
        return Err(Error::TooManyQubits { requested: g.num_vertices(), limit: MAX_QUBITS });
    }
    Ok(StabilizerSet { generators: g.generators() })
}

/// Single-qubit unitaries (one per vertex) taking |G⟩ to |τ_v(G)⟩:
/// exp(-iπ/4 X_v) on v and exp(+iπ/4 Z_u) on each neighbour u.
pub fn local_complement_unitaries(g: &GraphSpec, v: usize) -> Vec<Matrix> {
    let quarter = std::f64::consts::FRAC_PI_4;
    let nb = g.neighbors(v);
    (0..g.num_vertices())
        .map(|u| {
            if u == v {
                linalg::exp_involution(&linalg::pauli_x(), quarter)
            } else if nb.contains(&u) {
                linalg::exp_involution(&linalg::pauli_z(), -quarter)
            } else {
                linalg::identity(2)
            }
        })
        .collect()
}

/// Explicit local-Clifford equivalence between two graphs.
#[derive(Debug, Clone)]
pub struct LcEquivalence {
    /// Vertices at which local complementation is applied, in order.
    pub sequence: Vec<usize>,
    /// Relabelling of the final graph onto the target.
    pub permutation: Vec<usize>,
    /// Per-qubit unitaries U_v with (⊗U_v)|from⟩ = |τ…(from)⟩.
    pub unitaries: Vec<Matrix>,
}

/// Breadth-first search over local-complementation sequences, accepting the
/// first graph isomorphic to `to`.
pub fn find_lc_equivalence(from: &GraphSpec, to: &GraphSpec, max_depth: usize) -> Option<LcEquivalence> {
    if from.num_vertices() != to.num_vertices() {
        return None;
    }
    let mut seen: HashSet<Vec<(usize, usize)>> = HashSet::new();
    seen.insert(from.edges().to_vec());
    let mut queue = VecDeque::from([(from.clone(), Vec::<usize>::new())]);
    while let Some((g, seq)) = queue.pop_front() {
        if let Some(permutation) = g.isomorphism_to(to) {
            let mut unitaries = vec![linalg::identity(2); from.num_vertices()];
            let mut cur = from.clone();
            for &v in &seq {
                for (acc, u) in unitaries.iter_mut().zip(local_complement_unitaries(&cur, v)) {
                    *acc = &u * &*acc;
                }
                cur = cur.local_complement(v);
            }
            return Some(LcEquivalence { sequence: seq, permutation, unitaries });
        }
        if seq.len() == max_depth {
            continue;
        }
        for v in 0..g.num_vertices() {
            let h = g.local_complement(v);
            if seen.insert(h.edges().to_vec()) {
                let mut s = seq.clone();
                s.push(v);
                queue.push_back((h, s));
            }
        }
    }
    None
}

/// Move qubit v of `psi` to position perm[v].
pub fn permute_qubits(psi: &StateVector, perm: &[usize]) -> Result<StateVector> {
    let n = psi.num_qubits();
    if perm.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: perm.len() });
    }
    let mut out = vec![linalg::ZERO; 1 << n];
    for (i, &a) in psi.amplitudes().iter().enumerate() {
        let mut j = 0usize;
        for (v, &p) in perm.iter().enumerate() {
            if (i >> (n - 1 - v)) & 1 == 1 {
                j |= 1 << (n - 1 - p);
            }
        }
        out[j] = a;
    }
    StateVector::from_amplitudes(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(GraphSpec::new(2, &[(0, 0)]).is_err());
        assert!(GraphSpec::new(2, &[(0, 2)]).is_err());
        assert!(GraphSpec::new(3, &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn family_parsing() {
        assert_eq!(GraphFamily::parse("LC4", None).unwrap(), GraphFamily::Lc4);
        assert_eq!(GraphFamily::parse("ec", Some(3)).unwrap(), GraphFamily::Ec(3));
        assert_eq!(GraphFamily::parse("GHZ5", None).unwrap(), GraphFamily::Ghz(5));
        assert!(GraphFamily::parse("EC", None).is_err());
        assert!(GraphFamily::parse("foo", Some(2)).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = GraphSpec::ec(3).unwrap();
        let h = GraphSpec::parse_edge_list(&g.to_edge_list()).unwrap();
        assert_eq!(g.edges(), h.edges());
        assert!(GraphSpec::parse_edge_list("3\n0 1 2\n").is_err());
    }

    #[test]
    fn ec2_is_a_ring() {
        let ec2 = GraphSpec::ec(2).unwrap();
        assert!(ec2.isomorphism_to(&GraphSpec::ring(4)).is_some());
    }

    #[test]
    fn local_complement_of_star_center_gives_complete_graph() {
        let g = GraphSpec::star(4, 0).local_complement(0);
        assert_eq!(g.edges().len(), 6);
    }
}
