//! Two-qubit Cartan (KAK) decomposition with at most three CX gates.
//!
//! A two-qubit unitary is written as `(A1 ⊗ B1) · exp(i(a XX + b YY + c ZZ)) ·
//! (A0 ⊗ B0)` up to global phase. The interaction term is diagonal in the
//! magic basis, where local unitaries become real orthogonal matrices.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI, TAU};

use nalgebra::{Matrix4, SymmetricEigen};

use crate::circuit::{c, Circuit, Gate, GateKind, Mat2, Mat4, C64};
use crate::compile::rebase::fuse;
use crate::error::{Error, Result};

const INPUT_TOL: f64 = 1e-8;
const CLASS_TOL: f64 = 1e-9;

/// Canonical coordinates plus an equivalent native gate list on qubits 0, 1.
#[derive(Clone, Debug)]
pub struct KakDecomposition {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub cx_count: usize,
    /// `U3` and `CX` only.
    pub gates: Vec<Gate>,
}

fn magic() -> Mat4 {
    let s = FRAC_1_SQRT_2;
    let (o, z) = (c(s, 0.), c(0., 0.));
    let (i, mi) = (c(0., s), c(0., -s));
    Mat4::new(o, i, z, z, z, z, i, o, z, z, i, -o, o, mi, z, z)
}

fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

/// Eigenvalue signs of XX, YY and ZZ in the magic basis.
fn interaction_signs() -> [[f64; 4]; 3] {
    let b = magic();
    let paulis = [GateKind::X, GateKind::Y, GateKind::Z].map(|k| k.matrix1().unwrap());
    let mut out = [[0.; 4]; 3];
    for (row, p) in out.iter_mut().zip(&paulis) {
        let d = b.adjoint() * kron(p, p) * b;
        for (k, s) in row.iter_mut().enumerate() {
            *s = d[(k, k)].re.signum();
        }
    }
    out
}

/// Real orthogonal `P` with `Pᵀ m P` diagonal, for complex symmetric unitary
/// `m`. Its real and imaginary parts commute, so a generic real combination
/// of them shares their eigenvectors.
fn real_diagonalizer(m: &Mat4) -> Result<Matrix4<f64>> {
    let re = m.map(|z| z.re);
    let im = m.map(|z| z.im);
    for k in 1..=32 {
        let t = k as f64 * 0.618_033_988_749_895;
        let s = re * t.cos() + im * t.sin();
        let s = (s + s.transpose()) * 0.5;
        let p = SymmetricEigen::new(s).eigenvectors;
        let pc = p.map(|x| c(x, 0.));
        let d = pc.transpose() * m * pc;
        let off = (0..4)
            .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| d[(i, j)].norm())
            .fold(0., f64::max);
        if off < 1e-10 {
            return Ok(p);
        }
    }
    Err(Error::MalformedGate("could not diagonalize in the magic basis".into()))
}

/// Splits `m = A ⊗ B` (A on the high bit) up to phase.
fn factor_local(m: &Mat4) -> Option<(Mat2, Mat2)> {
    let block = |i: usize, j: usize| Mat2::from_fn(|k, l| m[(2 * i + k, 2 * j + l)]);
    let (bi, bj) = (0..4)
        .map(|x| (x / 2, x % 2))
        .max_by(|&(i, j), &(k, l)| block(i, j).norm().total_cmp(&block(k, l).norm()))
        .unwrap();
    let blk = block(bi, bj);
    let det = blk.determinant();
    if det.norm() < 1e-12 {
        return None;
    }
    let b = blk / det.sqrt();
    let a = Mat2::from_fn(|i, j| (b.adjoint() * block(i, j)).trace() / 2.);
    ((kron(&a, &b) - m).norm() < 1e-9).then_some((a, b))
}

fn ry(t: f64) -> GateKind {
    GateKind::U3(t, 0., 0.)
}

/// Gates equal to `exp(i(a XX + b YY + c ZZ))` up to phase, using the fewest
/// CX the coordinates allow.
fn interaction_gates(a: f64, b: f64, cc: f64, cx: usize) -> Vec<Gate> {
    let g = |k: GateKind, q: &[usize]| Gate::new(k, q).expect("valid template gate");
    match cx {
        0 => Vec::new(),
        1 => vec![
            g(GateKind::H, &[0]),
            g(GateKind::Cx, &[0, 1]),
            g(GateKind::Rz(-FRAC_PI_2), &[0]),
            g(GateKind::Rx(-FRAC_PI_2), &[1]),
            g(GateKind::H, &[0]),
        ],
        2 => vec![
            g(GateKind::Cx, &[0, 1]),
            g(GateKind::Rx(-2. * a), &[0]),
            g(GateKind::Rz(-2. * cc), &[1]),
            g(GateKind::Cx, &[0, 1]),
        ],
        _ => vec![
            g(GateKind::Rz(FRAC_PI_2), &[1]),
            g(GateKind::Cx, &[1, 0]),
            g(GateKind::Rz(FRAC_PI_2 - 2. * cc), &[0]),
            g(ry(FRAC_PI_2 - 2. * a), &[1]),
            g(GateKind::Cx, &[0, 1]),
            g(ry(2. * b - FRAC_PI_2), &[1]),
            g(GateKind::Cx, &[1, 0]),
            g(GateKind::Rz(-FRAC_PI_2), &[0]),
        ],
    }
}

fn cx_class(a: f64, b: f64, cc: f64) -> usize {
    let zero = |x: f64| x.abs() < CLASS_TOL;
    if zero(a) && zero(b) && zero(cc) {
        0
    } else if (a - FRAC_PI_4).abs() < CLASS_TOL && zero(b) && zero(cc) {
        1
    } else if zero(b) {
        2
    } else {
        3
    }
}

const PERMS: [[usize; 4]; 24] = {
    let mut out = [[0; 4]; 24];
    let mut n = 0;
    let mut i = 0;
    while i < 4 {
        let mut j = 0;
        while j < 4 {
            let mut k = 0;
            while k < 4 {
                if i != j && i != k && j != k {
                    out[n] = [i, j, k, 6 - i - j - k];
                    n += 1;
                }
                k += 1;
            }
            j += 1;
        }
        i += 1;
    }
    out
};

/// KAK decomposition of a 4×4 unitary (first qubit as the high bit).
pub fn kak_decompose(u: &Mat4) -> Result<KakDecomposition> {
    let dev = (u.adjoint() * u - Mat4::identity()).norm();
    if dev > INPUT_TOL {
        return Err(Error::NonUnitary(dev));
    }
    let us = u / u.determinant().powf(0.25);
    let bm = magic();
    let up = bm.adjoint() * us * bm;
    let m2 = up.transpose() * up;
    let p = real_diagonalizer(&m2)?;
    let pc = p.map(|x| c(x, 0.));
    let d = pc.transpose() * m2 * pc;
    let theta: [f64; 4] = std::array::from_fn(|k| d[(k, k)].arg() / 2.);
    let signs = interaction_signs();
    let coords =
        |t: &[f64; 4]| -> [f64; 3] { std::array::from_fn(|r| (0..4).map(|k| signs[r][k] * t[k]).sum::<f64>() / 4.) };

    let mut best: Option<(usize, [usize; 4], [f64; 4])> = None;
    'search: for perm in PERMS {
        for shift in 0..16u32 {
            let t: [f64; 4] = std::array::from_fn(|k| theta[perm[k]] + PI * ((shift >> k) & 1) as f64);
            let turns = t.iter().sum::<f64>() / TAU;
            if (turns - turns.round()).abs() > 1e-6 {
                continue;
            }
            let [a, b, cc] = coords(&t);
            let n = cx_class(a, b, cc);
            if best.as_ref().is_none_or(|(m, _, _)| n < *m) {
                best = Some((n, perm, t));
                if n == 0 {
                    break 'search;
                }
            }
        }
    }
    let (cx, perm, t) = best.ok_or_else(|| Error::MalformedGate("no canonical form found".into()))?;
    let [a, b, cc] = coords(&t);

    let mut pp = Matrix4::<f64>::from_fn(|r, k| p[(r, perm[k])]);
    if pp.determinant() < 0. {
        pp.column_mut(0).neg_mut();
    }
    let ppc = pp.map(|x| c(x, 0.));
    let phase = Mat4::from_diagonal(&nalgebra::Vector4::from_fn(|k, _| C64::from_polar(1., -t[k])));
    let k1 = (up * ppc * phase).map(|z| c(z.re, 0.));
    let k2 = ppc.transpose();
    let l1 = bm * k1 * bm.adjoint();
    let l2 = bm * k2 * bm.adjoint();
    let (a1, b1) = factor_local(&l1).ok_or_else(|| Error::MalformedGate("left factor is not local".into()))?;
    let (a0, b0) = factor_local(&l2).ok_or_else(|| Error::MalformedGate("right factor is not local".into()))?;

    let mut seq = Circuit::new(2);
    let u3 = |m: &Mat2| {
        let (th, ph, la, _) = crate::compile::rebase::u3_params(m);
        GateKind::U3(th, ph, la)
    };
    seq.gates.push(Gate {
        kind: u3(&a0),
        qubits: vec![0],
    });
    seq.gates.push(Gate {
        kind: u3(&b0),
        qubits: vec![1],
    });
    seq.gates.extend(interaction_gates(a, b, cc, cx));
    seq.gates.push(Gate {
        kind: u3(&a1),
        qubits: vec![0],
    });
    seq.gates.push(Gate {
        kind: u3(&b1),
        qubits: vec![1],
    });
    let fused = fuse(&seq, true);

    let rebuilt = fused.unitary()?;
    let target = nalgebra::DMatrix::from_fn(4, 4, |r, col| u[(r, col)]);
    let err = crate::circuit::phase_distance(&target, rebuilt.matrix());
    if err > 1e-8 {
        return Err(Error::MalformedGate(format!("reconstruction error {err:e}")));
    }
    Ok(KakDecomposition {
        a,
        b,
        c: cc,
        cx_count: cx,
        gates: fused.gates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::u3_matrix;
    use crate::gen::haar_su4;
    use crate::rng::BenchRng;
    use nalgebra::DMatrix;
    use rand::Rng;

    fn error_of(u: &Mat4, k: &KakDecomposition) -> f64 {
        let circ = Circuit::from_gates(2, k.gates.clone()).unwrap();
        let target = DMatrix::from_fn(4, 4, |r, col| u[(r, col)]);
        crate::circuit::phase_distance(&target, circ.unitary().unwrap().matrix())
    }

    fn random_local(rng: &mut BenchRng) -> Mat4 {
        let mut r = || rng.random_range(-PI..PI);
        kron(&u3_matrix(r(), r(), r()), &u3_matrix(r(), r(), r())) * C64::from_polar(1., r())
    }

    fn interaction(a: f64, b: f64, cc: f64) -> Mat4 {
        let p = [GateKind::X, GateKind::Y, GateKind::Z].map(|k| k.matrix1().unwrap());
        let h = (kron(&p[0], &p[0]) * c(a, 0.) + kron(&p[1], &p[1]) * c(b, 0.) + kron(&p[2], &p[2]) * c(cc, 0.))
            * c(0., 1.);
        // terms commute, so a truncated Taylor series of the sum is enough
        let mut term = Mat4::identity();
        let mut acc = Mat4::identity();
        for k in 1..40 {
            term = term * h / c(k as f64, 0.);
            acc += term;
        }
        acc
    }

    #[test]
    fn magic_basis_is_unitary_and_diagonalizes_interactions() {
        let b = magic();
        assert!((b.adjoint() * b - Mat4::identity()).norm() < 1e-14);
        let s = interaction_signs();
        for r in 0..3 {
            assert_eq!(s[r].iter().sum::<f64>(), 0.);
            for q in r + 1..3 {
                assert_eq!((0..4).map(|k| s[r][k] * s[q][k]).sum::<f64>(), 0.);
            }
        }
    }

    #[test]
    fn templates_match_interaction() {
        for (a, b, cc, n) in [
            (FRAC_PI_4, 0., 0., 1),
            (0.3, 0., -0.7, 2),
            (0.3, 0.2, -0.1, 3),
            (1.1, -0.4, 0.9, 3),
        ] {
            let circ = Circuit::from_gates(2, interaction_gates(a, b, cc, n)).unwrap();
            let target = interaction(a, b, cc);
            let t = DMatrix::from_fn(4, 4, |r, col| target[(r, col)]);
            assert!(crate::circuit::phase_distance(&t, circ.unitary().unwrap().matrix()) < 1e-12);
            assert_eq!(circ.two_qubit_count(), n);
        }
    }

    #[test]
    fn identity_needs_no_cx() {
        let k = kak_decompose(&Mat4::identity()).unwrap();
        assert_eq!(k.cx_count, 0);
        assert!(error_of(&Mat4::identity(), &k) < 1e-12);
    }

    #[test]
    fn cx_needs_one() {
        for kind in [GateKind::Cx, GateKind::Cz] {
            let m = kind.matrix2().unwrap();
            let k = kak_decompose(&m).unwrap();
            assert_eq!(k.cx_count, 1);
            assert!(error_of(&m, &k) < 1e-10);
        }
        let swap = GateKind::Swap.matrix2().unwrap();
        let k = kak_decompose(&swap).unwrap();
        assert_eq!(k.cx_count, 3);
        assert!(error_of(&swap, &k) < 1e-10);
    }

    #[test]
    fn local_products_need_none() {
        let mut rng = BenchRng::from_seed(21);
        for _ in 0..100 {
            let u = random_local(&mut rng);
            let k = kak_decompose(&u).unwrap();
            assert_eq!(k.cx_count, 0);
            assert!(error_of(&u, &k) < 1e-9);
        }
    }

    #[test]
    fn two_cx_class_detected() {
        let mut rng = BenchRng::from_seed(22);
        for _ in 0..20 {
            let u = random_local(&mut rng) * interaction(0.4, 0., 0.25) * random_local(&mut rng);
            let k = kak_decompose(&u).unwrap();
            assert_eq!(k.cx_count, 2);
            assert!(error_of(&u, &k) < 1e-9);
        }
    }

    #[test]
    fn haar_draws_reconstruct() {
        let mut rng = BenchRng::from_seed(23);
        for _ in 0..200 {
            let u = haar_su4(&mut rng);
            let k = kak_decompose(&u).unwrap();
            assert!(k.cx_count <= 3);
            assert!(k
                .gates
                .iter()
                .all(|g| matches!(g.kind, GateKind::U3(..) | GateKind::Cx)));
            assert!(error_of(&u, &k) < 1e-7);
        }
    }

    #[test]
    fn rejects_non_unitary() {
        let m = Mat4::identity() * c(1.01, 0.);
        assert!(matches!(kak_decompose(&m), Err(Error::NonUnitary(_))));
    }
}
