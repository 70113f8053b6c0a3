//! Circuit-class generators: shallow IQP, square random and deep Pauli-gadget
//! circuits, plus the random structures they are built from.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix4;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind, Mat4, C64};
use crate::error::{Error, Result};
use crate::rng::BenchRng;

/// Default number of rejected graphs before [`sample_shallow_graph`] gives up.
pub const DEFAULT_GRAPH_BUDGET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircuitClass {
    Shallow,
    Square,
    Deep,
}

impl CircuitClass {
    pub const ALL: [CircuitClass; 3] = [CircuitClass::Shallow, CircuitClass::Square, CircuitClass::Deep];

    pub fn name(self) -> &'static str {
        match self {
            CircuitClass::Shallow => "shallow",
            CircuitClass::Square => "square",
            CircuitClass::Deep => "deep",
        }
    }

    /// Stable small integer used when deriving per-circuit seeds.
    pub fn seed_tag(self) -> u64 {
        match self {
            CircuitClass::Shallow => 1,
            CircuitClass::Square => 2,
            CircuitClass::Deep => 3,
        }
    }

    /// Layer count used when none is requested: `n` for square circuits,
    /// `3n + 1` for deep circuits. Shallow circuits have no layer parameter.
    pub fn default_layers(self, n: usize) -> Option<usize> {
        match self {
            CircuitClass::Shallow => None,
            CircuitClass::Square => Some(n),
            CircuitClass::Deep => Some(3 * n + 1),
        }
    }

    pub fn generate(self, n: usize, layers: Option<usize>, rng: &mut BenchRng) -> Result<Circuit> {
        match self {
            CircuitClass::Shallow => gen_shallow(n, rng),
            CircuitClass::Square => gen_square(n, layers.unwrap_or(n), rng),
            CircuitClass::Deep => gen_deep(n, layers.unwrap_or(3 * n + 1), rng),
        }
    }
}

impl fmt::Display for CircuitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CircuitClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shallow" => Ok(CircuitClass::Shallow),
            "square" => Ok(CircuitClass::Square),
            "deep" => Ok(CircuitClass::Deep),
            other => Err(Error::Config(format!("unknown circuit class {other:?}"))),
        }
    }
}

/// Simple undirected graph on vertices `0..n_vertices`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UndirectedGraph {
    n_vertices: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl UndirectedGraph {
    pub fn new(n_vertices: usize) -> Self {
        Self {
            n_vertices,
            edges: BTreeSet::new(),
        }
    }

    pub fn from_edges(n_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(n_vertices);
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    /// Adds `{a, b}`; returns `false` if it was already present.
    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<bool> {
        if a == b {
            return Err(Error::MalformedGate(format!("self-loop on vertex {a}")));
        }
        if a.max(b) >= self.n_vertices {
            return Err(Error::OutOfRange(format!(
                "edge ({a}, {b}) in a graph with {} vertices",
                self.n_vertices
            )));
        }
        Ok(self.edges.insert((a.min(b), a.max(b))))
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    /// Edges as `(low, high)` pairs in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
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
            .collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n_vertices).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        if self.n_vertices == 0 {
            return true;
        }
        let mut seen = vec![false; self.n_vertices];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Draws binomial graphs G(n, 1/2) until one is connected with maximum degree
/// at most 3.
pub fn sample_shallow_graph(n: usize, rng: &mut BenchRng) -> Result<UndirectedGraph> {
    sample_shallow_graph_with_budget(n, rng, DEFAULT_GRAPH_BUDGET)
}

pub fn sample_shallow_graph_with_budget(n: usize, rng: &mut BenchRng, budget: u64) -> Result<UndirectedGraph> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("shallow graphs need n >= 2, got {n}")));
    }
    for _ in 0..budget {
        let mut g = UndirectedGraph::new(n);
        for a in 0..n {
            for b in a + 1..n {
                if rng.random_bool(0.5) {
                    g.edges.insert((a, b));
                }
            }
        }
        if g.max_degree() <= 3 && g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::BudgetExceeded { attempts: budget })
}

/// Proper edge colouring with at most Δ+1 colours (Misra–Gries).
///
/// Returns a map from `(low, high)` edge to colour index.
pub fn edge_coloring(graph: &UndirectedGraph) -> BTreeMap<(usize, usize), usize> {
    let n = graph.n_vertices();
    let palette = graph.max_degree() + 1;
    // color[u][v] mirrors color[v][u]
    let mut color: Vec<Vec<Option<usize>>> = vec![vec![None; n]; n];
    let adj: Vec<Vec<usize>> = (0..n).map(|v| graph.neighbors(v)).collect();

    let is_free = |color: &Vec<Vec<Option<usize>>>, x: usize, c: usize| adj[x].iter().all(|&y| color[x][y] != Some(c));
    let free_color = |color: &Vec<Vec<Option<usize>>>, x: usize| {
        (0..palette)
            .find(|&c| is_free(color, x, c))
            .expect("Δ+1 palette always leaves a free colour")
    };

    for (u, v) in graph.edges() {
        // maximal fan at u starting from v
        let mut fan = vec![v];
        let mut extended = true;
        while extended {
            extended = false;
            let last = *fan.last().unwrap();
            for &w in &adj[u] {
                if fan.contains(&w) {
                    continue;
                }
                if let Some(cw) = color[u][w] {
                    if is_free(&color, last, cw) {
                        fan.push(w);
                        extended = true;
                        break;
                    }
                }
            }
        }

        let c = free_color(&color, u);
        let d = free_color(&color, *fan.last().unwrap());

        // invert the cd-path starting at u (first edge coloured d)
        if c != d {
            let mut path = Vec::new();
            let mut cur = u;
            let mut want = d;
            let mut prev = usize::MAX;
            loop {
                let next = adj[cur]
                    .iter()
                    .copied()
                    .find(|&y| y != prev && color[cur][y] == Some(want));
                match next {
                    Some(y) => {
                        path.push((cur, y, want));
                        prev = cur;
                        cur = y;
                        want = if want == c { d } else { c };
                    }
                    None => break,
                }
            }
            for (a, b, col) in path {
                let flipped = if col == c { d } else { c };
                color[a][b] = Some(flipped);
                color[b][a] = Some(flipped);
            }
        }

        let w = fan
            .iter()
            .position(|&x| is_free(&color, x, d))
            .expect("some fan vertex has d free after inversion");

        for i in 0..w {
            let next = color[u][fan[i + 1]];
            color[u][fan[i]] = next;
            color[fan[i]][u] = next;
        }
        color[u][fan[w]] = Some(d);
        color[fan[w]][u] = Some(d);
    }

    graph
        .edges()
        .map(|(a, b)| ((a, b), color[a][b].expect("every edge coloured")))
        .collect()
}

fn h_layer(circ: &mut Circuit) -> Result<()> {
    for q in 0..circ.n_qubits() {
        circ.add(GateKind::H, &[q])?;
    }
    Ok(())
}

fn shallow_with(n: usize, rng: &mut BenchRng, fixed_angle: Option<f64>) -> Result<Circuit> {
    let graph = sample_shallow_graph(n, rng)?;
    let colors = edge_coloring(&graph);
    let mut by_layer: Vec<(usize, (usize, usize))> = colors.into_iter().map(|(e, c)| (c, e)).collect();
    by_layer.sort();

    let mut circ = Circuit::new(n);
    h_layer(&mut circ)?;
    for (_, (a, b)) in by_layer {
        circ.add(GateKind::Cz, &[a, b])?;
    }
    for q in 0..n {
        let alpha = match fixed_angle {
            Some(a) => a,
            None => rng.random_range(0.0..TAU),
        };
        circ.add(GateKind::Rz(alpha), &[q])?;
    }
    h_layer(&mut circ)?;
    Ok(circ)
}

/// Shallow IQP circuit: H layer, CZ on each edge of a sampled graph (grouped
/// by edge colour), RZ with uniform angle on every qubit, H layer.
pub fn gen_shallow(n: usize, rng: &mut BenchRng) -> Result<Circuit> {
    shallow_with(n, rng, None)
}

/// [`gen_shallow`] with every RZ angle pinned to `alpha`. The graph is still
/// sampled from `rng`.
pub fn gen_shallow_with_angle(n: usize, rng: &mut BenchRng, alpha: f64) -> Result<Circuit> {
    shallow_with(n, rng, Some(alpha))
}

/// Haar-random 4×4 special unitary: QR of a complex Ginibre matrix with the
/// phase correction on R's diagonal, rescaled to unit determinant.
pub fn haar_su4(rng: &mut BenchRng) -> Mat4 {
    let sqrt_half = std::f64::consts::FRAC_1_SQRT_2;
    loop {
        let ginibre = Matrix4::<C64>::from_fn(|_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re * sqrt_half, im * sqrt_half)
        });
        let qr = ginibre.qr();
        let r = qr.r();
        if (0..4).any(|i| r[(i, i)].norm() < 1e-12) {
            continue;
        }
        let mut q = qr.q();
        for j in 0..4 {
            let phase = r[(j, j)] / r[(j, j)].norm();
            for i in 0..4 {
                q[(i, j)] *= phase;
            }
        }
        let root = q.determinant().powf(0.25);
        return q / root;
    }
}

/// Square random circuit: each layer pairs the qubits by a uniformly random
/// shuffle and applies an independent Haar SU(4) to every pair. With odd `n`
/// the last qubit of the shuffle idles.
pub fn gen_square(n: usize, layers: usize, rng: &mut BenchRng) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("square circuits need n >= 2, got {n}")));
    }
    let mut circ = Circuit::new(n);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..layers {
        order.sort_unstable();
        order.shuffle(rng);
        for pair in order.chunks_exact(2) {
            let u = haar_su4(rng);
            circ.add(GateKind::Su4(Box::new(u)), pair)?;
        }
    }
    Ok(circ)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString(pub Vec<Pauli>);

impl PauliString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] != Pauli::I).collect()
    }

    /// Uniform over `{I,X,Y,Z}^n`, re-drawn until at least one symbol is not I.
    pub fn random_nontrivial(n: usize, rng: &mut BenchRng) -> Self {
        const SYMBOLS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        loop {
            let s = PauliString((0..n).map(|_| SYMBOLS[rng.random_range(0..4)]).collect());
            if s.weight() > 0 {
                return s;
            }
        }
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| match ch.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Config(format!("invalid pauli symbol {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliString)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|p| write!(f, "{}", p.symbol()))
    }
}

/// Gate sequence implementing `exp(-i (alpha/2) P)` for the Pauli tensor `P`
/// of `s` (qubit `i` of the circuit carries symbol `i`).
///
/// Layout: basis change on the support (H for X, RX(π/2) for Y), CX ladder
/// down the support, RZ(alpha) on the last support qubit, mirrored ladder,
/// inverse basis change.
pub fn pauli_gadget(alpha: f64, s: &PauliString) -> Result<Vec<Gate>> {
    let support = s.support();
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut basis = Vec::new();
    let mut unbasis = Vec::new();
    for &q in &support {
        match s.0[q] {
            Pauli::X => {
                basis.push(Gate::new(GateKind::H, &[q])?);
                unbasis.push(Gate::new(GateKind::H, &[q])?);
            }
            Pauli::Y => {
                basis.push(Gate::new(GateKind::Rx(FRAC_PI_2), &[q])?);
                unbasis.push(Gate::new(GateKind::Rx(-FRAC_PI_2), &[q])?);
            }
            _ => {}
        }
    }
    let ladder: Vec<Gate> = support
        .windows(2)
        .map(|w| Gate::new(GateKind::Cx, &[w[0], w[1]]))
        .collect::<Result<_>>()?;

    let mut gates = basis;
    gates.extend(ladder.iter().cloned());
    gates.push(Gate::new(GateKind::Rz(alpha), &[*support.last().unwrap()])?);
    gates.extend(ladder.into_iter().rev());
    gates.extend(unbasis);
    Ok(gates)
}

/// Deep circuit: `layers` Pauli gadgets, each with a fresh non-trivial random
/// string and a uniform angle in `[0, 2π)`.
pub fn gen_deep(n: usize, layers: usize, rng: &mut BenchRng) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("deep circuits need n >= 2, got {n}")));
    }
    let mut circ = Circuit::new(n);
    for _ in 0..layers {
        let s = PauliString::random_nontrivial(n, rng);
        let alpha = rng.random_range(0.0..TAU);
        circ.extend(pauli_gadget(alpha, &s)?)?;
    }
    Ok(circ)
}
