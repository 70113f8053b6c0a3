//! Statevector simulation, sampling and a stochastic Pauli noise model.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;

use crate::circuit::{Circuit, Gate, GateKind, Mat2, Mat4, C64};
use crate::error::{Error, Result};
use crate::rng::BenchRng;

/// Memory guard for [`statevector`].
pub const MAX_SIM_QUBITS: usize = 20;

const NORM_TOL: f64 = 1e-9;

/// Renders the low `n` bits of `x` with qubit 0 first.
pub fn bitstring(x: u64, n: usize) -> String {
    (0..n)
        .map(|q| if x >> (n - 1 - q) & 1 == 1 { '1' } else { '0' })
        .collect()
}

pub fn parse_bitstring(s: &str) -> Result<u64> {
    if s.is_empty() || s.len() > 64 {
        return Err(Error::OutOfRange(format!("bitstring {s:?}")));
    }
    s.chars().try_fold(0u64, |acc, ch| match ch {
        '0' => Ok(acc << 1),
        '1' => Ok(acc << 1 | 1),
        other => Err(Error::OutOfRange(format!("bit {other:?} in {s:?}"))),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits.
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if n > MAX_SIM_QUBITS {
            return Err(Error::WidthExceeded {
                width: n,
                limit: MAX_SIM_QUBITS,
            });
        }
        let mut amps = vec![C64::new(0., 0.); 1 << n];
        amps[index] = C64::new(1., 0.);
        Ok(Self { n_qubits: n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> ProbabilityTable {
        ProbabilityTable {
            n_qubits: self.n_qubits,
            probs: self.amps.iter().map(|a| a.norm_sqr()).collect(),
        }
    }

    #[inline]
    fn bit(&self, q: usize) -> usize {
        1 << (self.n_qubits - 1 - q)
    }

    pub fn apply_1q(&mut self, m: &Mat2, q: usize) {
        let stride = self.bit(q);
        let dim = self.amps.len();
        let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let mut base = 0;
        while base < dim {
            for i in base..base + stride {
                let a0 = self.amps[i];
                let a1 = self.amps[i + stride];
                self.amps[i] = m00 * a0 + m01 * a1;
                self.amps[i + stride] = m10 * a0 + m11 * a1;
            }
            base += 2 * stride;
        }
    }

    /// Dense 4×4 update; `q0` is the high bit of the local index.
    pub fn apply_2q(&mut self, m: &Mat4, q0: usize, q1: usize) {
        let (b0, b1) = (self.bit(q0), self.bit(q1));
        for i in 0..self.amps.len() {
            if i & (b0 | b1) != 0 {
                continue;
            }
            let idx = [i, i | b1, i | b0, i | b0 | b1];
            let v = idx.map(|k| self.amps[k]);
            for (r, &k) in idx.iter().enumerate() {
                self.amps[k] = (0..4).map(|col| m[(r, col)] * v[col]).sum();
            }
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        let q = &gate.qubits;
        match &gate.kind {
            GateKind::Cx => {
                let (bc, bt) = (self.bit(q[0]), self.bit(q[1]));
                for i in 0..self.amps.len() {
                    if i & bc != 0 && i & bt == 0 {
                        self.amps.swap(i, i | bt);
                    }
                }
            }
            GateKind::Cz => {
                let mask = self.bit(q[0]) | self.bit(q[1]);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & mask == mask {
                        *a = -*a;
                    }
                }
            }
            GateKind::Swap => {
                let (b0, b1) = (self.bit(q[0]), self.bit(q[1]));
                for i in 0..self.amps.len() {
                    if i & b0 != 0 && i & b1 == 0 {
                        self.amps.swap(i, (i & !b0) | b1);
                    }
                }
            }
            GateKind::Su4(m) => self.apply_2q(m, q[0], q[1]),
            kind => {
                let m = kind.matrix1().expect("single-qubit gate");
                self.apply_1q(&m, q[0]);
            }
        }
    }

    /// Applies Pauli `code` (0 = I, 1 = X, 2 = Y, 3 = Z) to qubit `q`.
    fn apply_pauli(&mut self, code: u8, q: usize) {
        let kind = match code {
            1 => GateKind::X,
            2 => GateKind::Y,
            3 => GateKind::Z,
            _ => return,
        };
        let m = kind.matrix1().unwrap();
        self.apply_1q(&m, q);
    }
}

/// Evolves `|0…0⟩` through the circuit.
pub fn statevector(circuit: &Circuit) -> Result<StateVector> {
    let mut sv = StateVector::zero(circuit.n_qubits())?;
    for g in circuit.gates() {
        sv.apply_gate(g);
    }
    Ok(sv)
}

/// Ideal output distribution `p(x) = |⟨x|C|0…0⟩|²`.
pub fn output_probabilities(circuit: &Circuit) -> Result<ProbabilityTable> {
    Ok(statevector(circuit)?.probabilities())
}

/// Dense distribution over `2^n` bitstrings, indexed with qubit 0 as MSB.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityTable {
    n_qubits: usize,
    probs: Vec<f64>,
}

impl ProbabilityTable {
    pub fn new(n_qubits: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != 1usize << n_qubits {
            return Err(Error::WidthMismatch {
                left: n_qubits,
                right: probs.len().trailing_zeros() as usize,
            });
        }
        if probs.iter().any(|p| !(0.0..=1.0 + NORM_TOL).contains(p)) {
            return Err(Error::OutOfRange("probability outside [0, 1]".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.).abs() > NORM_TOL {
            return Err(Error::OutOfRange(format!("probabilities sum to {total}")));
        }
        Ok(Self { n_qubits, probs })
    }

    pub fn uniform(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            n_qubits,
            probs: vec![1. / dim as f64; dim],
        }
    }

    pub fn point_mass(n_qubits: usize, x: u64) -> Self {
        let mut probs = vec![0.; 1 << n_qubits];
        probs[x as usize] = 1.;
        Self { n_qubits, probs }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: u64) -> f64 {
        self.probs[x as usize]
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }
}

/// Multiset of measured bitstrings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleSet {
    n_qubits: usize,
    counts: BTreeMap<u64, u64>,
    shots: u64,
}

impl SampleSet {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            counts: BTreeMap::new(),
            shots: 0,
        }
    }

    pub fn from_outcomes(n_qubits: usize, outcomes: impl IntoIterator<Item = u64>) -> Self {
        let mut s = Self::new(n_qubits);
        for x in outcomes {
            s.record(x, 1);
        }
        s
    }

    pub fn from_counts(n_qubits: usize, counts: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let mut s = Self::new(n_qubits);
        for (x, c) in counts {
            s.record(x, c);
        }
        s
    }

    pub fn record(&mut self, x: u64, times: u64) {
        debug_assert!(self.n_qubits == 64 || x >> self.n_qubits == 0);
        if times > 0 {
            *self.counts.entry(x).or_default() += times;
            self.shots += times;
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn count(&self, x: u64) -> u64 {
        self.counts.get(&x).copied().unwrap_or(0)
    }

    /// Observed `(bitstring, count)` pairs in increasing bitstring order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&x, &c)| (x, c))
    }

    /// Relabels every outcome through `f`, merging collisions.
    pub fn map_outcomes(&self, n_qubits: usize, f: impl Fn(u64) -> u64) -> SampleSet {
        SampleSet::from_counts(n_qubits, self.iter().map(|(x, c)| (f(x), c)))
    }
}

impl fmt::Display for SampleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (x, c) in self.iter() {
            writeln!(f, "{} {}", bitstring(x, self.n_qubits), c)?;
        }
        Ok(())
    }
}

/// Inverse-CDF sampler over a fixed table.
#[derive(Clone, Debug)]
pub struct Sampler {
    cumulative: Vec<f64>,
}

impl Sampler {
    pub fn new(probs: &[f64]) -> Self {
        let mut acc = 0.;
        let mut cumulative: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        Self { cumulative }
    }

    #[inline]
    pub fn draw(&self, rng: &mut BenchRng) -> u64 {
        let u: f64 = rng.random();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.cumulative.len() - 1) as u64
    }
}

/// `shots` i.i.d. draws from `table`, one uniform variate per shot.
pub fn sample_ideal(table: &ProbabilityTable, shots: u64, rng: &mut BenchRng) -> SampleSet {
    let sampler = Sampler::new(table.probs());
    SampleSet::from_outcomes(table.n_qubits(), (0..shots).map(|_| sampler.draw(rng)))
}

/// `shots` uniformly random bitstrings.
pub fn sample_uniform(n_qubits: usize, shots: u64, rng: &mut BenchRng) -> SampleSet {
    let mask = if n_qubits == 64 {
        u64::MAX
    } else {
        (1u64 << n_qubits) - 1
    };
    SampleSet::from_outcomes(n_qubits, (0..shots).map(|_| rng.random::<u64>() & mask))
}

/// Per-gate Pauli-injection and symmetric readout-flip probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    pub single_qubit: Vec<f64>,
    /// Keyed by `(low, high)` qubit pair.
    pub two_qubit: BTreeMap<(usize, usize), f64>,
    /// Used for pairs absent from `two_qubit`.
    pub two_qubit_default: f64,
    pub readout: Vec<f64>,
}

impl NoiseModel {
    pub fn ideal(n_qubits: usize) -> Self {
        Self::uniform(n_qubits, 0., 0., 0.)
    }

    pub fn uniform(n_qubits: usize, single: f64, two: f64, readout: f64) -> Self {
        Self {
            single_qubit: vec![single; n_qubits],
            two_qubit: BTreeMap::new(),
            two_qubit_default: two,
            readout: vec![readout; n_qubits],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.single_qubit.len()
    }

    pub fn two_qubit_error(&self, a: usize, b: usize) -> f64 {
        self.two_qubit
            .get(&(a.min(b), a.max(b)))
            .copied()
            .unwrap_or(self.two_qubit_default)
    }

    pub fn validate(&self) -> Result<()> {
        if self.readout.len() != self.single_qubit.len() {
            return Err(Error::WidthMismatch {
                left: self.single_qubit.len(),
                right: self.readout.len(),
            });
        }
        let all = self
            .single_qubit
            .iter()
            .chain(self.readout.iter())
            .chain(self.two_qubit.values())
            .chain(std::iter::once(&self.two_qubit_default));
        for &p in all {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::OutOfRange(format!("error rate {p} outside [0, 1)")));
            }
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.single_qubit.iter().chain(self.readout.iter()).all(|&p| p == 0.)
            && self.two_qubit.values().all(|&p| p == 0.)
            && self.two_qubit_default == 0.
    }
}

/// Trajectory sampling: after each gate a uniformly random non-identity Pauli
/// hits the gate's qubits with the gate's error probability, and each measured
/// bit flips with its qubit's readout error.
///
/// Random stream per shot: one variate per gate with non-zero error rate (plus
/// one for the Pauli choice when it fires), one for the outcome, one per qubit
/// with non-zero readout error. With all rates zero this is exactly the
/// stream of [`sample_ideal`] on the circuit's output table.
pub fn sample_noisy(circuit: &Circuit, noise: &NoiseModel, shots: u64, rng: &mut BenchRng) -> Result<SampleSet> {
    if let Some(g) = circuit.gates().iter().find(|g| !g.kind.is_native()) {
        return Err(Error::NonNativeGate(g.kind.to_string()));
    }
    if noise.n_qubits() != circuit.n_qubits() {
        return Err(Error::WidthMismatch {
            left: circuit.n_qubits(),
            right: noise.n_qubits(),
        });
    }
    noise.validate()?;

    let n = circuit.n_qubits();
    let gate_error: Vec<f64> = circuit
        .gates()
        .iter()
        .map(|g| match g.qubits.as_slice() {
            [q] => noise.single_qubit[*q],
            [a, b] => noise.two_qubit_error(*a, *b),
            _ => unreachable!("gates act on one or two qubits"),
        })
        .collect();
    let clean = Sampler::new(statevector(circuit)?.probabilities().probs());

    let mut samples = SampleSet::new(n);
    let mut faults: Vec<(usize, u8)> = Vec::new();
    for _ in 0..shots {
        faults.clear();
        for (i, (g, &eps)) in circuit.gates().iter().zip(&gate_error).enumerate() {
            if eps > 0. && rng.random::<f64>() < eps {
                let code = if g.qubits.len() == 1 {
                    rng.random_range(1..4u8)
                } else {
                    rng.random_range(1..16u8)
                };
                faults.push((i, code));
            }
        }

        let mut outcome = if faults.is_empty() {
            clean.draw(rng)
        } else {
            let mut sv = StateVector::zero(n)?;
            let mut next = faults.iter().peekable();
            for (i, g) in circuit.gates().iter().enumerate() {
                sv.apply_gate(g);
                while let Some(&&(fi, code)) = next.peek() {
                    if fi != i {
                        break;
                    }
                    if g.qubits.len() == 1 {
                        sv.apply_pauli(code, g.qubits[0]);
                    } else {
                        sv.apply_pauli(code >> 2, g.qubits[0]);
                        sv.apply_pauli(code & 3, g.qubits[1]);
                    }
                    next.next();
                }
            }
            Sampler::new(sv.probabilities().probs()).draw(rng)
        };

        for (q, &eps) in noise.readout.iter().enumerate() {
            if eps > 0. && rng.random::<f64>() < eps {
                outcome ^= 1 << (n - 1 - q);
            }
        }
        samples.record(outcome, 1);
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{gen_shallow_with_angle, pauli_gadget, PauliString};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, TAU};

    fn close(a: C64, re: f64, im: f64) -> bool {
        (a - C64::new(re, im)).norm() < 1e-12
    }

    #[test]
    fn hadamard_state() {
        let mut c = Circuit::new(1);
        c.add(GateKind::H, &[0]).unwrap();
        let sv = statevector(&c).unwrap();
        assert!(close(sv.amplitudes()[0], FRAC_1_SQRT_2, 0.));
        assert!(close(sv.amplitudes()[1], FRAC_1_SQRT_2, 0.));
        let p = output_probabilities(&c).unwrap();
        assert!((p.prob(0) - 0.5).abs() < 1e-12 && (p.prob(1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bell_state() {
        let mut c = Circuit::new(2);
        c.add(GateKind::H, &[0]).unwrap();
        c.add(GateKind::Cx, &[0, 1]).unwrap();
        let a = statevector(&c).unwrap();
        let a = a.amplitudes();
        assert!(close(a[0], FRAC_1_SQRT_2, 0.) && close(a[3], FRAC_1_SQRT_2, 0.));
        assert!(close(a[1], 0., 0.) && close(a[2], 0., 0.));
    }

    #[test]
    fn empty_circuit_table() {
        let p = output_probabilities(&Circuit::new(2)).unwrap();
        assert_eq!(p.probs(), &[1., 0., 0., 0.]);
    }

    #[test]
    fn full_period_gadget_is_identity_action() {
        let zz: PauliString = "ZZ".parse().unwrap();
        let mut c = Circuit::new(2);
        c.add(GateKind::H, &[0]).unwrap();
        c.add(GateKind::Rx(0.4), &[1]).unwrap();
        let before = statevector(&c).unwrap();
        c.extend(pauli_gadget(TAU, &zz).unwrap()).unwrap();
        let after = statevector(&c).unwrap();
        // exp(-iπ ZZ) = -I: equal up to a global phase
        let overlap: C64 = before
            .amplitudes()
            .iter()
            .zip(after.amplitudes())
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert!((overlap.norm() - 1.).abs() < 1e-9);
    }

    #[test]
    fn kernels_match_dense_oracle() {
        let mut rng = BenchRng::from_seed(3);
        for class in crate::gen::CircuitClass::ALL {
            for n in 2..7 {
                let circ = class.generate(n, None, &mut rng).unwrap();
                let p = output_probabilities(&circ).unwrap();
                let u = circ.unitary().unwrap();
                for x in 0..(1 << n) {
                    assert!((p.prob(x as u64) - u.0[(x, 0)].norm_sqr()).abs() < 1e-8);
                }
            }
        }
        let circ = gen_shallow_with_angle(5, &mut rng, FRAC_PI_2).unwrap();
        let p = output_probabilities(&circ).unwrap();
        let u = circ.unitary().unwrap();
        for x in 0..32 {
            assert!((p.prob(x as u64) - u.0[(x, 0)].norm_sqr()).abs() < 1e-9);
        }
    }

    #[test]
    fn swap_and_cz_kernels() {
        let mut c = Circuit::new(3);
        c.add(GateKind::X, &[0]).unwrap();
        c.add(GateKind::Swap, &[0, 2]).unwrap();
        assert_eq!(output_probabilities(&c).unwrap().prob(0b001), 1.);
        let mut c = Circuit::new(2);
        c.add(GateKind::H, &[0]).unwrap();
        c.add(GateKind::H, &[1]).unwrap();
        c.add(GateKind::Cz, &[1, 0]).unwrap();
        let a = statevector(&c).unwrap();
        assert!(close(a.amplitudes()[3], -0.5, 0.));
    }

    #[test]
    fn width_guard() {
        assert!(matches!(
            statevector(&Circuit::new(21)),
            Err(Error::WidthExceeded { width: 21, .. })
        ));
    }

    #[test]
    fn point_mass_sampling() {
        let t = ProbabilityTable::point_mass(3, 0b101);
        let s = sample_ideal(&t, 500, &mut BenchRng::from_seed(1));
        assert_eq!(s.count(0b101), 500);
        assert_eq!(s.shots(), 500);
    }

    #[test]
    fn fair_coin_within_six_sigma() {
        // σ = sqrt(8192/4) = 45.25; ±6σ ≈ ±256
        let t = ProbabilityTable::uniform(1);
        for seed in 0..5 {
            let s = sample_ideal(&t, 8192, &mut BenchRng::from_seed(seed));
            assert!((3840..=4352).contains(&s.count(0)), "{}", s.count(0));
        }
    }

    #[test]
    fn zero_probability_outcomes_never_drawn() {
        let t = ProbabilityTable::new(2, vec![0., 0.5, 0., 0.5]).unwrap();
        let s = sample_ideal(&t, 4000, &mut BenchRng::from_seed(8));
        assert_eq!(s.count(0) + s.count(2), 0);
    }

    #[test]
    fn bitstring_roundtrip() {
        assert_eq!(bitstring(0b011, 3), "011");
        assert_eq!(parse_bitstring("011").unwrap(), 3);
        assert!(parse_bitstring("01a").is_err());
    }

    #[test]
    fn table_validation() {
        assert!(ProbabilityTable::new(1, vec![0.5, 0.6]).is_err());
        assert!(ProbabilityTable::new(1, vec![1.5, -0.5]).is_err());
        assert!(ProbabilityTable::new(2, vec![0.5, 0.5]).is_err());
    }

    fn native_test_circuit() -> Circuit {
        let mut c = Circuit::new(3);
        c.add(GateKind::U2(0., std::f64::consts::PI), &[0]).unwrap();
        c.add(GateKind::Cx, &[0, 1]).unwrap();
        c.add(GateKind::U3(0.3, 0.2, 0.1), &[2]).unwrap();
        c.add(GateKind::Cx, &[1, 2]).unwrap();
        c.add(GateKind::U1(0.9), &[1]).unwrap();
        c
    }

    #[test]
    fn noiseless_noisy_sampling_matches_ideal_stream() {
        let c = native_test_circuit();
        let table = output_probabilities(&c).unwrap();
        let ideal = sample_ideal(&table, 3000, &mut BenchRng::from_seed(5));
        let noisy = sample_noisy(&c, &NoiseModel::ideal(3), 3000, &mut BenchRng::from_seed(5)).unwrap();
        assert_eq!(ideal, noisy);
    }

    #[test]
    fn noisy_rejects_non_native() {
        let mut c = Circuit::new(1);
        c.add(GateKind::H, &[0]).unwrap();
        assert!(matches!(
            sample_noisy(&c, &NoiseModel::ideal(1), 10, &mut BenchRng::from_seed(0)),
            Err(Error::NonNativeGate(_))
        ));
    }

    #[test]
    fn noise_model_validation() {
        let c = native_test_circuit();
        let bad = NoiseModel::uniform(3, 1.0, 0., 0.);
        assert!(sample_noisy(&c, &bad, 1, &mut BenchRng::from_seed(0)).is_err());
        assert!(sample_noisy(&c, &NoiseModel::ideal(2), 1, &mut BenchRng::from_seed(0)).is_err());
    }

    #[test]
    fn bit_flip_injection_hits_expected_rate() {
        // One identity-like U1(0) gate with ε1 = 0.3: X or Y flips the bit,
        // Z does not, so P(1) = 0.3 · 2/3 = 0.2.
        let mut c = Circuit::new(1);
        c.add(GateKind::U1(0.), &[0]).unwrap();
        let noise = NoiseModel::uniform(1, 0.3, 0., 0.);
        let s = sample_noisy(&c, &noise, 20_000, &mut BenchRng::from_seed(4)).unwrap();
        let p1 = s.count(1) as f64 / 20_000.;
        assert!((p1 - 0.2).abs() < 0.015, "{p1}");
    }

    #[test]
    fn readout_scrambling_gives_uniform_outcomes() {
        let c = native_test_circuit();
        let noise = NoiseModel::uniform(3, 0., 0., 0.5);
        let s = sample_noisy(&c, &noise, 8192, &mut BenchRng::from_seed(6)).unwrap();
        for x in 0..8 {
            let f = s.count(x) as f64 / 8192.;
            assert!((f - 0.125).abs() < 0.02, "{x}: {f}");
        }
    }
}
