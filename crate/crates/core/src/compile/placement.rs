//! Initial virtual-to-physical qubit placement.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::device::{CalibrationData, CouplingMap};
use crate::error::{Error, Result};

/// `placement[v]` is the physical qubit holding virtual qubit `v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement(Vec<usize>);

impl Placement {
    pub fn new(map: Vec<usize>, device_width: usize) -> Result<Self> {
        let mut seen = vec![false; device_width];
        for &p in &map {
            if p >= device_width || std::mem::replace(&mut seen[p], true) {
                return Err(Error::OutOfRange(format!(
                    "placement {map:?} is not injective into {device_width} qubits"
                )));
            }
        }
        Ok(Self(map))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn physical(&self, v: usize) -> usize {
        self.0[v]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Weights of the noise-aware placement cost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub two_qubit: f64,
    pub single_qubit: f64,
    pub readout: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            two_qubit: 1.,
            single_qubit: 0.1,
            readout: 0.,
        }
    }
}

impl CostWeights {
    /// Two-qubit and readout error weighted equally, single-qubit ignored.
    pub const READOUT_AWARE: CostWeights = CostWeights {
        two_qubit: 1.,
        single_qubit: 0.,
        readout: 1.,
    };
}

pub(crate) fn check_width(circuit: &Circuit, map: &CouplingMap) -> Result<()> {
    if circuit.n_qubits() > map.n_qubits() {
        return Err(Error::WidthExceeded {
            width: circuit.n_qubits(),
            limit: map.n_qubits(),
        });
    }
    Ok(())
}

/// Pair interaction counts keyed `(low, high)`, in a deterministic order.
fn interactions(circuit: &Circuit) -> BTreeMap<(usize, usize), usize> {
    let mut out = BTreeMap::new();
    for g in circuit.gates().iter().filter(|g| g.qubits.len() == 2) {
        let (a, b) = (g.qubits[0], g.qubits[1]);
        *out.entry((a.min(b), a.max(b))).or_insert(0) += 1;
    }
    out
}

/// Places virtual qubits in order of first two-qubit interaction. A qubit
/// whose earliest partner is already placed goes to the nearest free vertex
/// of that partner; otherwise it takes the next free vertex of a BFS walk
/// from the device centre.
pub fn line_placement(circuit: &Circuit, map: &CouplingMap) -> Result<Placement> {
    check_width(circuit, map)?;
    let n = circuit.n_qubits();
    let dev = map.n_qubits();
    let mut order = Vec::with_capacity(n);
    let mut partners: Vec<Vec<usize>> = vec![Vec::new(); n];
    for g in circuit.gates().iter().filter(|g| g.qubits.len() == 2) {
        let (a, b) = (g.qubits[0], g.qubits[1]);
        for (x, y) in [(a, b), (b, a)] {
            if !order.contains(&x) {
                order.push(x);
            }
            if !partners[x].contains(&y) {
                partners[x].push(y);
            }
        }
    }
    order.extend((0..n).filter(|v| partners[*v].is_empty()));

    let dist = map.distance_matrix();
    let root = (0..dev)
        .min_by_key(|&p| (dist[p].iter().max().copied().unwrap_or(0), p))
        .unwrap_or(0);
    let mut walk: Vec<usize> = (0..dev).collect();
    walk.sort_by_key(|&p| (dist[root][p], p));

    let mut used = vec![false; dev];
    let mut place = vec![usize::MAX; n];
    for v in order {
        let anchor = partners[v].iter().find(|&&u| place[u] != usize::MAX).map(|&u| place[u]);
        let p = match anchor {
            Some(a) => (0..dev).filter(|&p| !used[p]).min_by_key(|&p| (dist[a][p], p)),
            None => {
                let wants_neighbour = !partners[v].is_empty();
                walk.iter()
                    .copied()
                    .filter(|&p| !used[p])
                    .find(|&p| !wants_neighbour || map.neighbors(p).iter().any(|&q| !used[q]))
                    .or_else(|| walk.iter().copied().find(|&p| !used[p]))
            }
        }
        .expect("width checked");
        used[p] = true;
        place[v] = p;
    }
    Placement::new(place, dev)
}

/// All-pairs cheapest path cost where each edge costs its two-qubit error.
/// A tiny per-hop term breaks ties towards shorter paths so that zero-error
/// calibrations still prefer adjacency.
pub fn path_costs(map: &CouplingMap, cal: &CalibrationData) -> Vec<Vec<f64>> {
    const HOP: f64 = 1e-9;
    let n = map.n_qubits();
    let mean = if cal.two_qubit.is_empty() {
        0.
    } else {
        cal.two_qubit.values().sum::<f64>() / cal.two_qubit.len() as f64
    };
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.;
    }
    for (a, b) in map.undirected_edges() {
        let e = cal.two_qubit_error(a, b).unwrap_or(mean) + HOP;
        d[a][b] = d[a][b].min(e);
        d[b][a] = d[a][b];
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

struct CostModel<'a> {
    pairs: BTreeMap<(usize, usize), usize>,
    single_counts: Vec<usize>,
    paths: Vec<Vec<f64>>,
    cal: &'a CalibrationData,
    w: CostWeights,
}

impl<'a> CostModel<'a> {
    fn new(circuit: &Circuit, map: &CouplingMap, cal: &'a CalibrationData, w: CostWeights) -> Self {
        let mut single_counts = vec![0; circuit.n_qubits()];
        for g in circuit.gates().iter().filter(|g| g.qubits.len() == 1) {
            single_counts[g.qubits[0]] += 1;
        }
        Self {
            pairs: interactions(circuit),
            single_counts,
            paths: path_costs(map, cal),
            cal,
            w,
        }
    }

    fn local(&self, v: usize, p: usize) -> f64 {
        self.w.single_qubit * self.single_counts[v] as f64 * self.cal.single_qubit[p]
            + self.w.readout * self.cal.readout[p]
    }

    fn count(&self, u: usize, v: usize) -> usize {
        self.pairs.get(&(u.min(v), u.max(v))).copied().unwrap_or(0)
    }

    fn total(&self, place: &[usize]) -> f64 {
        let two: f64 = self
            .pairs
            .iter()
            .map(|(&(a, b), &k)| k as f64 * self.paths[place[a]][place[b]])
            .sum();
        self.w.two_qubit * two + (0..place.len()).map(|v| self.local(v, place[v])).sum::<f64>()
    }
}

/// Value of the noise-aware cost for a given placement: interaction counts
/// times cheapest-path two-qubit error, plus gate-count-weighted
/// single-qubit error and readout error of each placed qubit.
pub fn placement_cost(
    circuit: &Circuit,
    map: &CouplingMap,
    cal: &CalibrationData,
    placement: &Placement,
    weights: CostWeights,
) -> f64 {
    CostModel::new(circuit, map, cal, weights).total(placement.as_slice())
}

/// Greedy minimisation of [`placement_cost`]. The most frequent interacting
/// pair is placed first on the cheapest pair of device qubits, then the
/// remaining qubits one at a time, most-connected first. The line placement
/// is kept instead if it happens to be cheaper.
pub fn noise_aware_placement(
    circuit: &Circuit,
    map: &CouplingMap,
    cal: &CalibrationData,
    weights: CostWeights,
) -> Result<Placement> {
    check_width(circuit, map)?;
    cal.validate(map.n_qubits())?;
    let n = circuit.n_qubits();
    let dev = map.n_qubits();
    let model = CostModel::new(circuit, map, cal, weights);
    let mut place = vec![usize::MAX; n];
    let mut used = vec![false; dev];

    if let Some((&(u, v), &k)) = model.pairs.iter().max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(x.0))) {
        let mut best = (f64::INFINITY, 0, 0);
        for p in 0..dev {
            for q in (0..dev).filter(|&q| q != p) {
                let c = weights.two_qubit * k as f64 * model.paths[p][q] + model.local(u, p) + model.local(v, q);
                if c < best.0 {
                    best = (c, p, q);
                }
            }
        }
        place[u] = best.1;
        place[v] = best.2;
        used[best.1] = true;
        used[best.2] = true;
    }

    while let Some(v) = (0..n).filter(|&v| place[v] == usize::MAX).max_by(|&x, &y| {
        let key = |v: usize| {
            let placed: usize = (0..n)
                .filter(|&u| place[u] != usize::MAX)
                .map(|u| model.count(u, v))
                .sum();
            let total: usize = (0..n).map(|u| model.count(u, v)).sum();
            (placed, total)
        };
        key(x).cmp(&key(y)).then(y.cmp(&x))
    }) {
        let mut best = (f64::INFINITY, usize::MAX);
        for p in (0..dev).filter(|&p| !used[p]) {
            let two: f64 = (0..n)
                .filter(|&u| place[u] != usize::MAX)
                .map(|u| model.count(u, v) as f64 * model.paths[p][place[u]])
                .sum();
            let c = weights.two_qubit * two + model.local(v, p);
            if c < best.0 {
                best = (c, p);
            }
        }
        place[v] = best.1;
        used[best.1] = true;
    }

    let greedy = Placement::new(place, dev)?;
    let line = line_placement(circuit, map)?;
    if model.total(line.as_slice()) < model.total(greedy.as_slice()) {
        Ok(line)
    } else {
        Ok(greedy)
    }
}
