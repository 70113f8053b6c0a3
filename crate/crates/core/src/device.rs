//! Device models: coupling maps, calibration data and graph properties.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::NoiseModel;

/// Directed coupling graph. `(c, t)` means a CX with control `c` and target
/// `t` is native.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CouplingMap {
    n_qubits: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl CouplingMap {
    /// Directed map. Rejects self-loops and out-of-range endpoints; does not
    /// check connectivity (see [`CouplingMap::is_connected`]).
    pub fn directed(n_qubits: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a == b || a >= n_qubits || b >= n_qubits {
                return Err(Error::InvalidDevice(format!("bad edge {a}-{b}")));
            }
            set.insert((a, b));
        }
        Ok(Self { n_qubits, edges: set })
    }

    /// Every edge usable in both directions.
    pub fn bidirectional(n_qubits: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let both: Vec<_> = edges.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
        Self::directed(n_qubits, &both)
    }

    pub fn complete(n_qubits: usize) -> Self {
        let edges = (0..n_qubits)
            .flat_map(|a| (0..n_qubits).filter(move |&b| b != a).map(move |b| (a, b)))
            .collect();
        Self { n_qubits, edges }
    }

    pub fn line(n_qubits: usize) -> Self {
        let e: Vec<_> = (1..n_qubits).map(|i| (i - 1, i)).collect();
        Self::bidirectional(n_qubits, &e).expect("valid line")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// CX(c, t) is native.
    pub fn allows(&self, c: usize, t: usize) -> bool {
        self.edges.contains(&(c, t))
    }

    /// Adjacent in the undirected skeleton.
    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.allows(a, b) || self.allows(b, a)
    }

    /// Undirected skeleton edges as `(low, high)`.
    pub fn undirected_edges(&self) -> BTreeSet<(usize, usize)> {
        self.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect()
    }

    /// Sorted undirected neighbours.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        set.into_iter().collect()
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_qubits];
        for (a, b) in self.undirected_edges() {
            adj[a].push(b);
            adj[b].push(a);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        adj
    }

    /// BFS hop distances from `src`; `usize::MAX` when unreachable.
    pub fn bfs_distances(&self, src: usize) -> Vec<usize> {
        bfs(&self.adjacency(), src).0
    }

    /// All-pairs hop distances.
    pub fn distance_matrix(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        (0..self.n_qubits).map(|s| bfs(&adj, s).0).collect()
    }

    pub fn is_connected(&self) -> bool {
        self.n_qubits == 0 || self.bfs_distances(0).iter().all(|&d| d != usize::MAX)
    }

    /// Shortest undirected path from `a` to `b` inclusive, preferring lower
    /// vertex indices on ties.
    pub fn shortest_path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        let (dist, parent) = bfs(&self.adjacency(), a);
        if dist[b] == usize::MAX {
            return None;
        }
        let mut path = vec![b];
        let mut v = b;
        while v != a {
            v = parent[v];
            path.push(v);
        }
        path.reverse();
        Some(path)
    }
}

fn bfs(adj: &[Vec<usize>], src: usize) -> (Vec<usize>, Vec<usize>) {
    let n = adj.len();
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    dist[src] = 0;
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u] {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                parent[w] = u;
                queue.push_back(w);
            }
        }
    }
    (dist, parent)
}

/// Reported error rates. Two-qubit errors are keyed by directed edge; a
/// lookup falls back to the reverse direction.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CalibrationData {
    pub readout: Vec<f64>,
    pub single_qubit: Vec<f64>,
    pub two_qubit: BTreeMap<(usize, usize), f64>,
}

impl CalibrationData {
    pub fn uniform(map: &CouplingMap, single: f64, two: f64, readout: f64) -> Self {
        Self {
            readout: vec![readout; map.n_qubits()],
            single_qubit: vec![single; map.n_qubits()],
            two_qubit: map.edges().map(|e| (e, two)).collect(),
        }
    }

    pub fn two_qubit_error(&self, a: usize, b: usize) -> Option<f64> {
        self.two_qubit
            .get(&(a, b))
            .or_else(|| self.two_qubit.get(&(b, a)))
            .copied()
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.readout.len() != n_qubits || self.single_qubit.len() != n_qubits {
            return Err(Error::InvalidDevice(format!(
                "calibration lists must have {n_qubits} entries"
            )));
        }
        for &p in self
            .readout
            .iter()
            .chain(&self.single_qubit)
            .chain(self.two_qubit.values())
        {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::OutOfRange(format!("error rate {p} outside [0, 1)")));
            }
        }
        if let Some(&(a, b)) = self.two_qubit.keys().find(|&&(a, b)| a >= n_qubits || b >= n_qubits) {
            return Err(Error::InvalidDevice(format!("calibration edge {a}-{b} out of range")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeviceModel {
    pub name: String,
    pub coupling: CouplingMap,
    pub calibration: CalibrationData,
}

#[derive(Serialize, Deserialize)]
struct DeviceFile {
    name: String,
    n_qubits: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    directed: bool,
    calibration: CalibrationFile,
}

#[derive(Serialize, Deserialize)]
struct CalibrationFile {
    readout: Vec<f64>,
    single_qubit: Vec<f64>,
    two_qubit: BTreeMap<String, f64>,
}

const BUILTIN: [(&str, &str); 4] = [
    ("ibmqx2", include_str!("../data/devices/ibmqx2.json")),
    ("ibmq_ourense", include_str!("../data/devices/ibmq_ourense.json")),
    (
        "ibmq_16_melbourne",
        include_str!("../data/devices/ibmq_16_melbourne.json"),
    ),
    ("ibmq_singapore", include_str!("../data/devices/ibmq_singapore.json")),
];

impl DeviceModel {
    pub fn new(name: impl Into<String>, coupling: CouplingMap, calibration: CalibrationData) -> Result<Self> {
        calibration.validate(coupling.n_qubits())?;
        if !coupling.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(Self {
            name: name.into(),
            coupling,
            calibration,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.coupling.n_qubits()
    }

    pub fn builtin_names() -> impl Iterator<Item = &'static str> {
        BUILTIN.iter().map(|(n, _)| *n)
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let (_, text) = BUILTIN
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::InvalidDevice(format!("no bundled device named {name:?}")))?;
        Self::from_json(text)
    }

    pub fn builtins() -> Vec<Self> {
        Self::builtin_names()
            .map(|n| Self::builtin(n).expect("bundled device parses"))
            .collect()
    }

    /// A bundled name, or else a path to a device file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        if Self::builtin_names().any(|n| n == name_or_path) {
            Self::builtin(name_or_path)
        } else {
            Self::load(name_or_path)
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: DeviceFile = serde_json::from_str(text)?;
        let edges: Vec<_> = f.edges.iter().map(|e| (e[0], e[1])).collect();
        let coupling = if f.directed {
            CouplingMap::directed(f.n_qubits, &edges)?
        } else {
            CouplingMap::bidirectional(f.n_qubits, &edges)?
        };
        let mut two_qubit = BTreeMap::new();
        for (key, &p) in &f.calibration.two_qubit {
            let pair = key
                .split_once('-')
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
                .ok_or_else(|| Error::InvalidDevice(format!("bad edge key {key:?}")))?;
            two_qubit.insert(pair, p);
        }
        let calibration = CalibrationData {
            readout: f.calibration.readout,
            single_qubit: f.calibration.single_qubit,
            two_qubit,
        };
        Self::new(f.name, coupling, calibration)
    }

    /// Serialized in the same format [`DeviceModel::from_json`] reads. Maps
    /// whose edges all come in both directions are written undirected.
    pub fn to_json(&self) -> Result<String> {
        let directed = self.coupling.edges().any(|(a, b)| !self.coupling.allows(b, a));
        let edges = if directed {
            self.coupling.edges().map(|(a, b)| [a, b]).collect()
        } else {
            self.coupling
                .undirected_edges()
                .into_iter()
                .map(|(a, b)| [a, b])
                .collect()
        };
        let file = DeviceFile {
            name: self.name.clone(),
            n_qubits: self.n_qubits(),
            edges,
            directed,
            calibration: CalibrationFile {
                readout: self.calibration.readout.clone(),
                single_qubit: self.calibration.single_qubit.clone(),
                two_qubit: self
                    .calibration
                    .two_qubit
                    .iter()
                    .map(|(&(a, b), &p)| (format!("{a}-{b}"), p))
                    .collect(),
            },
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Noise model for a circuit whose qubit `i` sits on device qubit
    /// `physical[i]`. Pairs without calibration fall back to the mean
    /// two-qubit error.
    pub fn noise_model(&self, physical: &[usize]) -> NoiseModel {
        let cal = &self.calibration;
        let mean2 = if cal.two_qubit.is_empty() {
            0.
        } else {
            cal.two_qubit.values().sum::<f64>() / cal.two_qubit.len() as f64
        };
        let mut two_qubit = BTreeMap::new();
        for (i, &pi) in physical.iter().enumerate() {
            for (j, &pj) in physical.iter().enumerate().skip(i + 1) {
                if let Some(e) = cal.two_qubit_error(pi, pj) {
                    two_qubit.insert((i, j), e);
                }
            }
        }
        NoiseModel {
            single_qubit: physical.iter().map(|&p| cal.single_qubit[p]).collect(),
            two_qubit,
            two_qubit_default: mean2,
            readout: physical.iter().map(|&p| cal.readout[p]).collect(),
        }
    }
}

/// Average degree as the reduced fraction `2E / V`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ratio {
    pub num: usize,
    pub den: usize,
}

impl Ratio {
    pub fn new(num: usize, den: usize) -> Self {
        let g = gcd(num, den).max(1);
        Self {
            num: num / g,
            den: den / g,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl std::fmt::Display for Ratio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphProperties {
    pub vertices: usize,
    pub average_degree: Ratio,
    pub radius: usize,
    /// `None` for forests.
    pub min_cycle_length: Option<usize>,
}

/// Properties of the undirected skeleton.
pub fn graph_properties(map: &CouplingMap) -> Result<GraphProperties> {
    let n = map.n_qubits();
    if n == 0 {
        return Err(Error::EmptyInput("coupling map"));
    }
    let adj = map.adjacency();
    let mut radius = usize::MAX;
    let mut girth: Option<usize> = None;
    for s in 0..n {
        let (dist, parent) = bfs(&adj, s);
        let ecc = *dist.iter().max().unwrap();
        if ecc == usize::MAX {
            return Err(Error::Disconnected);
        }
        radius = radius.min(ecc);
        // A non-tree edge closes a cycle through s of length at most
        // dist[u] + dist[w] + 1; the minimum over all roots is the girth.
        for u in 0..n {
            for &w in &adj[u] {
                if u < w && parent[w] != u && parent[u] != w {
                    let len = dist[u] + dist[w] + 1;
                    girth = Some(girth.map_or(len, |g| g.min(len)));
                }
            }
        }
    }
    let e = map.undirected_edges().len();
    Ok(GraphProperties {
        vertices: n,
        average_degree: Ratio::new(2 * e, n),
        radius,
        min_cycle_length: girth,
    })
}

/// Published properties of the bundled maps, used by `qbench devices`.
pub fn published_properties(name: &str) -> Option<GraphProperties> {
    let (v, e2, radius, girth) = match name {
        "ibmqx2" => (5, 12, 1, Some(3)),
        "ibmq_ourense" => (5, 8, 2, None),
        "ibmq_16_melbourne" => (15, 40, 4, Some(4)),
        "ibmq_singapore" => (20, 46, 4, Some(6)),
        _ => return None,
    };
    Some(GraphProperties {
        vertices: v,
        average_degree: Ratio::new(e2, v),
        radius,
        min_cycle_length: girth,
    })
}

fn check_prob(p: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("{what} = {p} outside [0, 1]")))
    }
}

/// Mean of the two mislabelling probabilities.
pub fn readout_error(p0_given_1: f64, p1_given_0: f64) -> Result<f64> {
    check_prob(p0_given_1, "Pr(0|1)")?;
    check_prob(p1_given_0, "Pr(1|0)")?;
    Ok((p0_given_1 + p1_given_0) / 2.)
}

/// Error per Clifford `(1 - p)(1 - 1/2^n)` from an RB decay rate.
pub fn rb_error_per_clifford(p: f64, n: usize) -> Result<f64> {
    check_prob(p, "decay")?;
    if n == 0 || n > 32 {
        return Err(Error::OutOfRange(format!("qubit count {n}")));
    }
    Ok((1. - p) * (1. - 1. / (1u64 << n) as f64))
}

/// Pauli error `(1 - p)(1 - 1/4^n)`.
pub fn pauli_error(p: f64, n: usize) -> Result<f64> {
    check_prob(p, "decay")?;
    if n == 0 || n > 31 {
        return Err(Error::OutOfRange(format!("qubit count {n}")));
    }
    Ok((1. - p) * (1. - 1. / (1u64 << (2 * n)) as f64))
}
