//! Circuit intermediate representation and the dense-matrix oracle.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt;

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;

/// Width limit for [`Circuit::unitary`].
pub const MAX_DENSE_QUBITS: usize = 12;

const UNITARY_TOL: f64 = 1e-10;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    Rx(f64),
    Rz(f64),
    U1(f64),
    U2(f64, f64),
    U3(f64, f64, f64),
    /// Control is the first qubit of the gate, target the second.
    Cx,
    Cz,
    Swap,
    /// Arbitrary two-qubit unitary; row/column index is `2 * b0 + b1` where
    /// `b0` is the bit of the gate's first qubit.
    Su4(Box<Mat4>),
}

/// Payload-free discriminant of [`GateKind`], used for counting and filtering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateTag {
    H,
    X,
    Y,
    Z,
    Rx,
    Rz,
    U1,
    U2,
    U3,
    Cx,
    Cz,
    Swap,
    Su4,
}

impl GateTag {
    pub fn name(self) -> &'static str {
        match self {
            GateTag::H => "h",
            GateTag::X => "x",
            GateTag::Y => "y",
            GateTag::Z => "z",
            GateTag::Rx => "rx",
            GateTag::Rz => "rz",
            GateTag::U1 => "u1",
            GateTag::U2 => "u2",
            GateTag::U3 => "u3",
            GateTag::Cx => "cx",
            GateTag::Cz => "cz",
            GateTag::Swap => "swap",
            GateTag::Su4 => "su4",
        }
    }
}

impl GateKind {
    pub fn tag(&self) -> GateTag {
        match self {
            GateKind::H => GateTag::H,
            GateKind::X => GateTag::X,
            GateKind::Y => GateTag::Y,
            GateKind::Z => GateTag::Z,
            GateKind::Rx(_) => GateTag::Rx,
            GateKind::Rz(_) => GateTag::Rz,
            GateKind::U1(_) => GateTag::U1,
            GateKind::U2(..) => GateTag::U2,
            GateKind::U3(..) => GateTag::U3,
            GateKind::Cx => GateTag::Cx,
            GateKind::Cz => GateTag::Cz,
            GateKind::Swap => GateTag::Swap,
            GateKind::Su4(_) => GateTag::Su4,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cx | GateKind::Cz | GateKind::Swap | GateKind::Su4(_) => 2,
            _ => 1,
        }
    }

    /// Native to the device model: `U1`, `U2`, `U3` and `CX`.
    pub fn is_native(&self) -> bool {
        matches!(
            self,
            GateKind::U1(_) | GateKind::U2(..) | GateKind::U3(..) | GateKind::Cx
        )
    }

    fn all_angles(&self) -> Vec<f64> {
        match self {
            GateKind::U2(a, b) => vec![*a, *b],
            GateKind::U3(a, b, d) => vec![*a, *b, *d],
            GateKind::Rx(a) | GateKind::Rz(a) | GateKind::U1(a) => vec![*a],
            _ => Vec::new(),
        }
    }

    /// 2×2 matrix of a single-qubit gate.
    pub fn matrix1(&self) -> Option<Mat2> {
        let h = FRAC_1_SQRT_2;
        let m = match *self {
            GateKind::H => Mat2::new(c(h, 0.), c(h, 0.), c(h, 0.), c(-h, 0.)),
            GateKind::X => Mat2::new(c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)),
            GateKind::Y => Mat2::new(c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)),
            GateKind::Z => Mat2::new(c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)),
            GateKind::Rx(t) => {
                let (s, co) = (t / 2.).sin_cos();
                Mat2::new(c(co, 0.), c(0., -s), c(0., -s), c(co, 0.))
            }
            GateKind::Rz(t) => Mat2::new(
                C64::from_polar(1., -t / 2.),
                c(0., 0.),
                c(0., 0.),
                C64::from_polar(1., t / 2.),
            ),
            GateKind::U1(l) => u3_matrix(0., 0., l),
            GateKind::U2(p, l) => u3_matrix(FRAC_PI_2, p, l),
            GateKind::U3(t, p, l) => u3_matrix(t, p, l),
            _ => return None,
        };
        Some(m)
    }

    /// 4×4 matrix of a two-qubit gate, first qubit as the high bit.
    pub fn matrix2(&self) -> Option<Mat4> {
        let o = c(1., 0.);
        let z = c(0., 0.);
        let m = match self {
            GateKind::Cx => Mat4::new(o, z, z, z, z, o, z, z, z, z, z, o, z, z, o, z),
            GateKind::Cz => Mat4::new(o, z, z, z, z, o, z, z, z, z, o, z, z, z, z, -o),
            GateKind::Swap => Mat4::new(o, z, z, z, z, z, o, z, z, o, z, z, z, z, z, o),
            GateKind::Su4(m) => **m,
            _ => return None,
        };
        Some(m)
    }

    /// Kind whose matrix is exactly the adjoint of this one.
    pub fn inverse(&self) -> GateKind {
        match self {
            GateKind::Rx(a) => GateKind::Rx(-a),
            GateKind::Rz(a) => GateKind::Rz(-a),
            GateKind::U1(l) => GateKind::U1(-l),
            GateKind::U2(p, l) => GateKind::U3(-FRAC_PI_2, -l, -p),
            GateKind::U3(t, p, l) => GateKind::U3(-t, -l, -p),
            GateKind::Su4(m) => GateKind::Su4(Box::new(m.adjoint())),
            other => other.clone(),
        }
    }
}

/// The device-native parameterised single-qubit gate.
pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> Mat2 {
    let (s, co) = (theta / 2.).sin_cos();
    Mat2::new(
        c(co, 0.),
        -C64::from_polar(s, lambda),
        C64::from_polar(s, phi),
        C64::from_polar(co, lambda + phi),
    )
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let angles = self.all_angles();
        if angles.is_empty() {
            write!(f, "{}", self.tag().name())
        } else {
            let parts: Vec<String> = angles.iter().map(|a| format!("{a}")).collect();
            write!(f, "{}({})", self.tag().name(), parts.join(","))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl Gate {
    /// Checks arity, distinct qubits, finite angles and (for `Su4`) unitarity.
    pub fn new(kind: GateKind, qubits: &[usize]) -> Result<Self> {
        if qubits.len() != kind.arity() {
            return Err(Error::MalformedGate(format!(
                "{} expects {} qubit(s), got {}",
                kind.tag().name(),
                kind.arity(),
                qubits.len()
            )));
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(Error::MalformedGate(format!(
                "{} acts twice on qubit {}",
                kind.tag().name(),
                qubits[0]
            )));
        }
        if kind.all_angles().iter().any(|a| !a.is_finite()) {
            return Err(Error::MalformedGate(format!("non-finite angle in {kind}")));
        }
        if let GateKind::Su4(m) = &kind {
            let dev = unitarity_deviation(&DMatrix::from_iterator(4, 4, m.iter().copied()));
            if dev > UNITARY_TOL {
                return Err(Error::NonUnitary(dev));
            }
        }
        Ok(Self {
            kind,
            qubits: qubits.to_vec(),
        })
    }

    pub fn inverse(&self) -> Gate {
        Gate {
            kind: self.kind.inverse(),
            qubits: self.qubits.clone(),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let qs: Vec<String> = self.qubits.iter().map(|q| format!("q{q}")).collect();
        write!(f, "{} {}", self.kind, qs.join(","))
    }
}

/// An `n`-qubit circuit acting on `|0…0⟩`, with optional terminal
/// computational-basis measurement of every qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    pub(crate) gates: Vec<Gate>,
    pub measure_all: bool,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
            measure_all: true,
        }
    }

    pub fn from_gates(n_qubits: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut circ = Self::new(n_qubits);
        for g in gates {
            circ.push(g)?;
        }
        Ok(circ)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        if let Some(&q) = gate.qubits.iter().find(|&&q| q >= self.n_qubits) {
            return Err(Error::MalformedGate(format!(
                "qubit {q} out of range for a {}-qubit circuit",
                self.n_qubits
            )));
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Validates and appends `kind` on `qubits`.
    pub fn add(&mut self, kind: GateKind, qubits: &[usize]) -> Result<()> {
        let g = Gate::new(kind, qubits)?;
        self.push(g)
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// Gate-reversed adjoint circuit.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
            measure_all: self.measure_all,
        }
    }

    /// Number of ASAP layers: each gate joins the earliest layer in which none
    /// of its qubits is busy.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.n_qubits];
        let mut depth = 0;
        for g in &self.gates {
            let l = g.qubits.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
            for &q in &g.qubits {
                level[q] = l;
            }
            depth = depth.max(l);
        }
        depth
    }

    pub fn gate_count(&self, filter: Option<GateTag>) -> usize {
        match filter {
            None => self.gates.len(),
            Some(tag) => self.gates.iter().filter(|g| g.kind.tag() == tag).count(),
        }
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind.arity() == 2).count()
    }

    /// Dense unitary of the gate list (measurement ignored).
    ///
    /// Each gate is applied as a row gather: output row `r` mixes the rows of
    /// the running product whose indices differ from `r` only on the gate's
    /// qubits. This is deliberately a different code path from the
    /// simulator's stride kernels so the two can check each other.
    pub fn unitary(&self) -> Result<UnitaryMatrix> {
        if self.n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::WidthExceeded {
                width: self.n_qubits,
                limit: MAX_DENSE_QUBITS,
            });
        }
        let n = self.n_qubits;
        let dim = 1usize << n;
        let mut u = DMatrix::<C64>::identity(dim, dim);
        for g in &self.gates {
            let (local, qs): (DMatrix<C64>, Vec<usize>) = match g.kind.arity() {
                1 => {
                    let m = g.kind.matrix1().expect("single-qubit matrix");
                    (DMatrix::from_iterator(2, 2, m.iter().copied()), g.qubits.clone())
                }
                _ => {
                    let m = g.kind.matrix2().expect("two-qubit matrix");
                    (DMatrix::from_iterator(4, 4, m.iter().copied()), g.qubits.clone())
                }
            };
            let k = qs.len();
            let sub = 1usize << k;
            let bit = |q: usize| 1usize << (n - 1 - q);
            let mask: usize = qs.iter().map(|&q| bit(q)).sum();
            let local_index =
                |r: usize| -> usize { qs.iter().fold(0, |acc, &q| (acc << 1) | usize::from(r & bit(q) != 0)) };
            let with_local = |r: usize, j: usize| -> usize {
                let mut out = r & !mask;
                for (pos, &q) in qs.iter().enumerate() {
                    if (j >> (k - 1 - pos)) & 1 == 1 {
                        out |= bit(q);
                    }
                }
                out
            };
            let mut next = DMatrix::<C64>::zeros(dim, dim);
            for r in 0..dim {
                let i = local_index(r);
                for j in 0..sub {
                    let coef = local[(i, j)];
                    if coef == C64::new(0., 0.) {
                        continue;
                    }
                    let src = with_local(r, j);
                    for col in 0..dim {
                        next[(r, col)] += coef * u[(src, col)];
                    }
                }
            }
            u = next;
        }
        Ok(UnitaryMatrix(u))
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "circuit on {} qubits, {} gates", self.n_qubits, self.gates.len())?;
        for g in &self.gates {
            writeln!(f, "  {g}")?;
        }
        Ok(())
    }
}

/// Dense `2^n × 2^n` unitary with qubit 0 as the most significant index bit.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(pub DMatrix<C64>);

impl UnitaryMatrix {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    /// Largest entry of `|U†U − I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        unitarity_deviation(&self.0)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// Largest entrywise deviation between `other` and `e^{iθ}·self`, with the
    /// phase fixed by the largest-magnitude entry of `self`.
    pub fn phase_distance(&self, other: &UnitaryMatrix) -> f64 {
        phase_distance(&self.0, &other.0)
    }

    pub fn equiv_up_to_phase(&self, other: &UnitaryMatrix, tol: f64) -> bool {
        self.dim() == other.dim() && self.phase_distance(other) <= tol
    }
}

pub(crate) fn unitarity_deviation(m: &DMatrix<C64>) -> f64 {
    let p = m.adjoint() * m;
    let n = p.nrows();
    let mut worst: f64 = 0.;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1. } else { 0. };
            worst = worst.max((p[(i, j)] - C64::new(target, 0.)).norm());
        }
    }
    worst
}

/// Entrywise distance between `b` and `a` after aligning global phase.
pub fn phase_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    let (idx, _) = a.iter().enumerate().fold(
        (0, -1.),
        |best, (i, v)| if v.norm() > best.1 { (i, v.norm()) } else { best },
    );
    let ai = a.as_slice()[idx];
    let bi = b.as_slice()[idx];
    if bi.norm() < 1e-300 {
        return f64::INFINITY;
    }
    let phase = (bi / ai) / (bi / ai).norm();
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (y - phase * x).norm())
        .fold(0., f64::max)
}
