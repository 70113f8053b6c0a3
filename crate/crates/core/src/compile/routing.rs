//! Greedy SWAP insertion along shortest paths, with CX direction repair.

use crate::circuit::{Circuit, Gate, GateKind};
use crate::compile::placement::{check_width, Placement};
use crate::device::CouplingMap;
use crate::error::{Error, Result};

/// Routed circuit on the full device width.
#[derive(Clone, Debug)]
pub struct Routed {
    pub circuit: Circuit,
    /// Virtual → physical before the first gate.
    pub initial: Vec<usize>,
    /// Virtual → physical after the last gate.
    pub final_layout: Vec<usize>,
    pub swaps: usize,
}

/// `CX(c, t)` as native gates: unchanged when the edge exists, otherwise
/// reversed and conjugated by Hadamards on both qubits.
pub fn directed_cx(map: &CouplingMap, c: usize, t: usize) -> Result<Vec<Gate>> {
    if map.allows(c, t) {
        Ok(vec![Gate::new(GateKind::Cx, &[c, t])?])
    } else if map.allows(t, c) {
        let h = |q| Gate::new(GateKind::H, &[q]);
        Ok(vec![h(c)?, h(t)?, Gate::new(GateKind::Cx, &[t, c])?, h(c)?, h(t)?])
    } else {
        Err(Error::MalformedGate(format!("no coupling between {c} and {t}")))
    }
}

/// Rewrites every CX against the edge direction.
pub fn fix_directions(circuit: &Circuit, map: &CouplingMap) -> Result<Circuit> {
    let mut out = Circuit::new(circuit.n_qubits());
    out.measure_all = circuit.measure_all;
    for g in circuit.gates() {
        if g.kind == GateKind::Cx {
            out.extend(directed_cx(map, g.qubits[0], g.qubits[1])?)?;
        } else {
            out.push(g.clone())?;
        }
    }
    Ok(out)
}

/// Maps `circuit` onto `map` starting from `placement`. Before each
/// two-qubit gate on non-adjacent qubits, the first operand is swapped along
/// a shortest path until it neighbours the second. Inserted SWAPs are
/// emitted as three CX and every CX is direction-corrected; other two-qubit
/// gates keep their operand order.
pub fn route(circuit: &Circuit, map: &CouplingMap, placement: &Placement) -> Result<Routed> {
    check_width(circuit, map)?;
    if placement.len() != circuit.n_qubits() {
        return Err(Error::WidthMismatch {
            left: placement.len(),
            right: circuit.n_qubits(),
        });
    }
    let dev = map.n_qubits();
    let mut l2p = placement.as_slice().to_vec();
    let mut p2l: Vec<Option<usize>> = vec![None; dev];
    for (v, &p) in l2p.iter().enumerate() {
        p2l[p] = Some(v);
    }
    let mut out = Circuit::new(dev);
    out.measure_all = circuit.measure_all;
    let mut swaps = 0;
    for g in circuit.gates() {
        if g.qubits.len() == 1 {
            out.push(Gate::new(g.kind.clone(), &[l2p[g.qubits[0]]])?)?;
            continue;
        }
        let (a, b) = (g.qubits[0], g.qubits[1]);
        if !map.adjacent(l2p[a], l2p[b]) {
            let path = map.shortest_path(l2p[a], l2p[b]).ok_or(Error::Disconnected)?;
            for w in path.windows(2).take(path.len() - 2) {
                let (x, y) = (w[0], w[1]);
                for (c, t) in [(x, y), (y, x), (x, y)] {
                    out.extend(directed_cx(map, c, t)?)?;
                }
                swaps += 1;
                p2l.swap(x, y);
                for p in [x, y] {
                    if let Some(v) = p2l[p] {
                        l2p[v] = p;
                    }
                }
            }
        }
        let (pa, pb) = (l2p[a], l2p[b]);
        if g.kind == GateKind::Cx {
            out.extend(directed_cx(map, pa, pb)?)?;
        } else {
            out.push(Gate::new(g.kind.clone(), &[pa, pb])?)?;
        }
    }
    Ok(Routed {
        circuit: out,
        initial: placement.as_slice().to_vec(),
        final_layout: l2p,
        swaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::DeviceModel;
    use crate::gen::gen_square;
    use crate::rng::BenchRng;
    use crate::sim::statevector;

    #[test]
    fn conforming_circuit_unchanged() {
        let d = DeviceModel::builtin("ibmqx2").unwrap();
        let mut c = Circuit::new(5);
        c.add(GateKind::H, &[0]).unwrap();
        c.add(GateKind::Cx, &[0, 1]).unwrap();
        c.add(GateKind::Cz, &[2, 4]).unwrap();
        c.add(GateKind::Cx, &[4, 3]).unwrap();
        let r = route(&c, &d.coupling, &Placement::identity(5)).unwrap();
        assert_eq!(r.circuit, c);
        assert_eq!(r.swaps, 0);
        assert_eq!(r.final_layout, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn complete_map_never_swaps() {
        let mut rng = BenchRng::from_seed(3);
        let map = CouplingMap::complete(5);
        for _ in 0..5 {
            let c = gen_square(5, 5, &mut rng).unwrap();
            let r = route(&c, &map, &Placement::identity(5)).unwrap();
            assert_eq!(r.swaps, 0);
        }
    }

    #[test]
    fn distant_cx_on_hub_map() {
        let d = DeviceModel::builtin("ibmq_ourense").unwrap();
        let mut c = Circuit::new(5);
        for q in 0..5 {
            c.add(GateKind::H, &[q]).unwrap();
        }
        c.add(GateKind::Rz(0.3), &[0]).unwrap();
        c.add(GateKind::Cx, &[0, 4]).unwrap();
        c.add(GateKind::Rx(0.7), &[4]).unwrap();
        let r = route(&c, &d.coupling, &Placement::identity(5)).unwrap();
        assert!(r.swaps >= 1);
        for g in r.circuit.gates().iter().filter(|g| g.qubits.len() == 2) {
            assert!(d.coupling.allows(g.qubits[0], g.qubits[1]));
        }
        // the routed state equals the original with qubits relabelled
        let want = statevector(&c).unwrap();
        let got = statevector(&r.circuit).unwrap();
        let perm = &r.final_layout;
        for x in 0..32usize {
            let mut y = 0;
            for (v, &p) in perm.iter().enumerate() {
                if x >> (4 - v) & 1 == 1 {
                    y |= 1 << (4 - p);
                }
            }
            assert!((want.amplitudes()[x] - got.amplitudes()[y]).norm() < 1e-12);
        }
    }

    #[test]
    fn reversed_cx_gets_hadamards() {
        let map = CouplingMap::directed(2, &[(1, 0)]).unwrap();
        let g = directed_cx(&map, 0, 1).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.iter().filter(|g| g.kind == GateKind::H).count(), 4);
        let c = Circuit::from_gates(2, g).unwrap();
        let cx = Circuit::from_gates(2, [Gate::new(GateKind::Cx, &[0, 1]).unwrap()]).unwrap();
        assert!(c.unitary().unwrap().phase_distance(&cx.unitary().unwrap()) < 1e-12);
    }
}
