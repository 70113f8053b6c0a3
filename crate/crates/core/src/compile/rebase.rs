//! Rewriting into the native set `{U1, U2, U3, CX}` and single-qubit fusion.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::circuit::{Circuit, Gate, GateKind, Mat2};
use crate::compile::kak::kak_decompose;
use crate::error::Result;

/// Native replacement for one gate.
pub fn rebase_gate(gate: &Gate) -> Result<Vec<Gate>> {
    let q = &gate.qubits;
    let one = |k: GateKind| Gate::new(k, &[q[0]]);
    let out = match &gate.kind {
        GateKind::U1(_) | GateKind::U2(..) | GateKind::U3(..) | GateKind::Cx => vec![gate.clone()],
        GateKind::H => vec![one(GateKind::U2(0., PI))?],
        GateKind::X => vec![one(GateKind::U3(PI, 0., PI))?],
        GateKind::Y => vec![one(GateKind::U3(PI, FRAC_PI_2, FRAC_PI_2))?],
        GateKind::Z => vec![one(GateKind::U1(PI))?],
        GateKind::Rz(a) => vec![one(GateKind::U1(*a))?],
        GateKind::Rx(a) => vec![one(GateKind::U3(*a, -FRAC_PI_2, FRAC_PI_2))?],
        GateKind::Cz => {
            let h = Gate::new(GateKind::U2(0., PI), &[q[1]])?;
            vec![h.clone(), Gate::new(GateKind::Cx, q)?, h]
        }
        GateKind::Swap => {
            let cx = Gate::new(GateKind::Cx, q)?;
            vec![cx.clone(), Gate::new(GateKind::Cx, &[q[1], q[0]])?, cx]
        }
        GateKind::Su4(m) => kak_decompose(m)?
            .gates
            .into_iter()
            .map(|g| {
                let qs: Vec<usize> = g.qubits.iter().map(|&i| q[i]).collect();
                Gate::new(g.kind, &qs)
            })
            .collect::<Result<_>>()?,
    };
    Ok(out)
}

/// Circuit containing only `U1`, `U2`, `U3` and `CX`, equal to the input up
/// to global phase.
pub fn rebase(circuit: &Circuit) -> Result<Circuit> {
    let mut out = Circuit::new(circuit.n_qubits());
    out.measure_all = circuit.measure_all;
    for g in circuit.gates() {
        out.extend(rebase_gate(g)?)?;
    }
    Ok(out)
}

/// `(θ, φ, λ, γ)` with `m = e^{iγ} U3(θ, φ, λ)` for a 2×2 unitary `m`.
pub fn u3_params(m: &Mat2) -> (f64, f64, f64, f64) {
    const EPS: f64 = 1e-12;
    let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let theta = 2. * m10.norm().atan2(m00.norm());
    if m00.norm() > EPS {
        let gamma = m00.arg();
        if m10.norm() > EPS {
            (theta, m10.arg() - gamma, (-m01).arg() - gamma, gamma)
        } else {
            (theta, 0., m11.arg() - gamma, gamma)
        }
    } else {
        let gamma = m10.arg();
        (theta, 0., (-m01).arg() - gamma, gamma)
    }
}

fn is_identity_up_to_phase(m: &Mat2) -> bool {
    let p = m[(0, 0)];
    p.norm() > 0.5 && m[(0, 1)].norm() < 1e-12 && m[(1, 0)].norm() < 1e-12 && (m[(1, 1)] - p).norm() < 1e-12
}

/// Merges every maximal run of single-qubit gates on a qubit into one `U3`,
/// dropping runs that multiply to the identity. Lone gates are kept as they
/// are. Two-qubit gates keep their relative order.
pub fn fuse_single_qubit(circuit: &Circuit) -> Circuit {
    fuse(circuit, false)
}

pub(crate) fn fuse(circuit: &Circuit, always_u3: bool) -> Circuit {
    let n = circuit.n_qubits();
    let mut out = Circuit::new(n);
    out.measure_all = circuit.measure_all;
    let mut runs: Vec<Vec<&Gate>> = vec![Vec::new(); n];
    let flush = |run: &mut Vec<&Gate>, q: usize, out: &mut Circuit| {
        if run.len() == 1 && !always_u3 {
            out.gates.push(run[0].clone());
        } else if !run.is_empty() {
            let mut m = Mat2::identity();
            for g in run.iter() {
                m = g.kind.matrix1().expect("single-qubit gate") * m;
            }
            if !is_identity_up_to_phase(&m) {
                let (t, p, l, _) = u3_params(&m);
                out.gates.push(Gate {
                    kind: GateKind::U3(t, p, l),
                    qubits: vec![q],
                });
            }
        }
        run.clear();
    };
    for g in circuit.gates() {
        if g.qubits.len() == 1 {
            runs[g.qubits[0]].push(g);
        } else {
            for &q in &g.qubits {
                flush(&mut runs[q], q, &mut out);
            }
            out.gates.push(g.clone());
        }
    }
    for (q, run) in runs.iter_mut().enumerate() {
        flush(run, q, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{u3_matrix, C64};
    use crate::gen::{gen_deep, gen_shallow, gen_square};
    use crate::rng::BenchRng;
    use rand::Rng;

    fn equiv(a: &Circuit, b: &Circuit) -> f64 {
        a.unitary().unwrap().phase_distance(&b.unitary().unwrap())
    }

    #[test]
    fn hadamard_is_u2() {
        let h = GateKind::H.matrix1().unwrap();
        let u2 = GateKind::U2(0., PI).matrix1().unwrap();
        assert!((h - u2).norm() < 1e-15);
        let g = rebase_gate(&Gate::new(GateKind::H, &[0]).unwrap()).unwrap();
        assert_eq!(g[0].kind, GateKind::U2(0., PI));
    }

    #[test]
    fn every_single_qubit_rule_matches() {
        for k in [
            GateKind::H,
            GateKind::X,
            GateKind::Y,
            GateKind::Z,
            GateKind::Rx(0.37),
            GateKind::Rz(-1.2),
        ] {
            let c = Circuit::from_gates(1, [Gate::new(k.clone(), &[0]).unwrap()]).unwrap();
            let r = rebase(&c).unwrap();
            assert!(r.gates().iter().all(|g| g.kind.is_native()));
            assert!(equiv(&c, &r) < 1e-12, "{k}");
        }
    }

    #[test]
    fn two_qubit_rules_match() {
        for k in [GateKind::Cz, GateKind::Swap] {
            let c = Circuit::from_gates(3, [Gate::new(k, &[2, 0]).unwrap()]).unwrap();
            let r = rebase(&c).unwrap();
            assert!(r.gates().iter().all(|g| g.kind.is_native()));
            assert!(equiv(&c, &r) < 1e-12);
        }
    }

    #[test]
    fn native_input_unchanged() {
        let mut c = Circuit::new(2);
        c.add(GateKind::U1(0.3), &[0]).unwrap();
        c.add(GateKind::U2(0.1, 0.2), &[1]).unwrap();
        c.add(GateKind::Cx, &[1, 0]).unwrap();
        c.add(GateKind::U3(0.4, 0.5, 0.6), &[0]).unwrap();
        assert_eq!(rebase(&c).unwrap(), c);
    }

    #[test]
    fn generated_circuits_rebase_exactly() {
        let mut rng = BenchRng::from_seed(5);
        for _ in 0..5 {
            for c in [
                gen_square(3, 3, &mut rng).unwrap(),
                gen_shallow(4, &mut rng).unwrap(),
                gen_deep(3, 4, &mut rng).unwrap(),
            ] {
                let r = rebase(&c).unwrap();
                assert!(r.gates().iter().all(|g| g.kind.is_native()));
                assert!(equiv(&c, &r) < 1e-7);
            }
        }
    }

    #[test]
    fn u3_params_reconstruct() {
        let mut rng = BenchRng::from_seed(9);
        for i in 0..500 {
            let t = match i % 5 {
                0 => 0.,
                1 => PI,
                _ => rng.random_range(-4.0..4.0),
            };
            let (p, l, g) = (
                rng.random_range(-4.0..4.0),
                rng.random_range(-4.0..4.0),
                rng.random_range(-4.0..4.0),
            );
            let m = u3_matrix(t, p, l) * C64::from_polar(1., g);
            let (t2, p2, l2, g2) = u3_params(&m);
            let back = u3_matrix(t2, p2, l2) * C64::from_polar(1., g2);
            assert!((back - m).norm() < 1e-12);
        }
    }

    #[test]
    fn fusion_preserves_unitary_and_two_qubit_order() {
        let mut rng = BenchRng::from_seed(11);
        for _ in 0..10 {
            let c = rebase(&gen_deep(4, 3, &mut rng).unwrap()).unwrap();
            let f = fuse_single_qubit(&c);
            assert!(equiv(&c, &f) < 1e-9);
            let two =
                |c: &Circuit| -> Vec<Gate> { c.gates().iter().filter(|g| g.qubits.len() == 2).cloned().collect() };
            assert_eq!(two(&c), two(&f));
            assert!(f.len() <= c.len());
            // no two adjacent single-qubit gates remain on a qubit
            let mut last_single = [false; 4];
            for g in f.gates() {
                if g.qubits.len() == 1 {
                    assert!(!last_single[g.qubits[0]]);
                    last_single[g.qubits[0]] = true;
                } else {
                    for &q in &g.qubits {
                        last_single[q] = false;
                    }
                }
            }
        }
    }

    #[test]
    fn inverse_pair_fuses_away() {
        let mut c = Circuit::new(1);
        c.add(GateKind::Rx(0.3), &[0]).unwrap();
        c.add(GateKind::Rx(-0.3), &[0]).unwrap();
        assert!(fuse_single_qubit(&c).is_empty());
    }
}
