//! Compilation onto device models: placement, routing, rebase to the native
//! gate set and single-qubit gate fusion.

pub mod kak;
pub mod placement;
pub mod rebase;
pub mod routing;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, MAX_DENSE_QUBITS};
use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::sim::{NoiseModel, SampleSet, StateVector, MAX_SIM_QUBITS};

pub use kak::{kak_decompose, KakDecomposition};
pub use placement::{line_placement, noise_aware_placement, placement_cost, CostWeights, Placement};
pub use rebase::{fuse_single_qubit, rebase};
pub use routing::{route, Routed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Virtual qubit `i` starts on physical qubit `i`.
    RoutingOnly,
    /// [`line_placement`].
    LineUnaware,
    /// [`noise_aware_placement`].
    NoiseAware,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::RoutingOnly, Strategy::LineUnaware, Strategy::NoiseAware];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::RoutingOnly => "routing_only",
            Strategy::LineUnaware => "line_unaware",
            Strategy::NoiseAware => "noise_aware",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown strategy {s:?}")))
    }
}

/// A compiled circuit on the device qubits it touches.
///
/// Qubit `i` of `circuit` is device qubit `physical[i]`. Virtual qubit `v`
/// starts on compact qubit `initial[v]` and is measured from
/// `final_layout[v]`; every other compact qubit starts in `|0⟩`.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub circuit: Circuit,
    pub physical: Vec<usize>,
    pub placement: Placement,
    pub initial: Vec<usize>,
    pub final_layout: Vec<usize>,
    pub swaps: usize,
}

impl Compiled {
    pub fn n_virtual(&self) -> usize {
        self.initial.len()
    }

    /// Device-frame noise restricted to the compact qubits.
    pub fn noise_model(&self, device: &DeviceModel) -> NoiseModel {
        device.noise_model(&self.physical)
    }

    /// Samples over the compact qubits, read out in the virtual frame.
    pub fn unpermute(&self, samples: &SampleSet) -> SampleSet {
        let m = self.circuit.n_qubits();
        let n = self.n_virtual();
        let layout = self.final_layout.clone();
        samples.map_outcomes(n, move |x| {
            layout
                .iter()
                .enumerate()
                .fold(0, |y, (v, &c)| y | ((x >> (m - 1 - c)) & 1) << (n - 1 - v))
        })
    }

    /// Every gate is native and every CX runs along a coupling edge.
    pub fn check_native(&self, device: &DeviceModel) -> Result<()> {
        for g in self.circuit.gates() {
            if !g.kind.is_native() {
                return Err(Error::NonNativeGate(g.to_string()));
            }
            if g.qubits.len() == 2
                && !device
                    .coupling
                    .allows(self.physical[g.qubits[0]], self.physical[g.qubits[1]])
            {
                return Err(Error::MalformedGate(format!("{g} is not on a coupling edge")));
            }
        }
        Ok(())
    }
}

pub fn compile(circuit: &Circuit, device: &DeviceModel, strategy: Strategy) -> Result<Compiled> {
    compile_with(circuit, device, strategy, CostWeights::default())
}

/// Placement, routing, rebase, direction repair, then single-qubit fusion.
pub fn compile_with(
    circuit: &Circuit,
    device: &DeviceModel,
    strategy: Strategy,
    weights: CostWeights,
) -> Result<Compiled> {
    let map = &device.coupling;
    placement::check_width(circuit, map)?;
    let placement = match strategy {
        Strategy::RoutingOnly => Placement::identity(circuit.n_qubits()),
        Strategy::LineUnaware => line_placement(circuit, map)?,
        Strategy::NoiseAware => noise_aware_placement(circuit, map, &device.calibration, weights)?,
    };
    let routed = route(circuit, map, &placement)?;
    let native = routing::fix_directions(&rebase(&routed.circuit)?, map)?;
    let fused = fuse_single_qubit(&rebase(&native)?);

    let mut touched = vec![false; map.n_qubits()];
    for &p in placement.as_slice() {
        touched[p] = true;
    }
    for g in fused.gates() {
        for &q in &g.qubits {
            touched[q] = true;
        }
    }
    let physical: Vec<usize> = (0..touched.len()).filter(|&p| touched[p]).collect();
    let mut compact = vec![usize::MAX; touched.len()];
    for (i, &p) in physical.iter().enumerate() {
        compact[p] = i;
    }
    let mut out = Circuit::new(physical.len());
    out.measure_all = circuit.measure_all;
    for g in fused.gates() {
        let qs: Vec<usize> = g.qubits.iter().map(|&q| compact[q]).collect();
        out.push(Gate::new(g.kind.clone(), &qs)?)?;
    }
    Ok(Compiled {
        circuit: out,
        initial: routed.initial.iter().map(|&p| compact[p]).collect(),
        final_layout: routed.final_layout.iter().map(|&p| compact[p]).collect(),
        physical,
        placement,
        swaps: routed.swaps,
    })
}

/// Largest amplitude deviation between the compiled circuit and the
/// original, over every computational basis input of the virtual qubits.
/// Ancillas start in `|0⟩` and must end there; one global phase is shared by
/// all inputs.
pub fn equivalence_error(original: &Circuit, compiled: &Compiled) -> Result<f64> {
    let n = original.n_qubits();
    let m = compiled.circuit.n_qubits();
    if n > MAX_DENSE_QUBITS || m > MAX_SIM_QUBITS {
        return Err(Error::WidthExceeded {
            width: m.max(n),
            limit: MAX_DENSE_QUBITS,
        });
    }
    if compiled.n_virtual() != n {
        return Err(Error::WidthMismatch {
            left: n,
            right: compiled.n_virtual(),
        });
    }
    let u = original.unitary()?;
    let embed = |x: usize, layout: &[usize]| {
        layout
            .iter()
            .enumerate()
            .fold(0usize, |y, (v, &c)| y | ((x >> (n - 1 - v)) & 1) << (m - 1 - c))
    };
    let mut phase = None;
    let mut worst: f64 = 0.;
    for x in 0..1usize << n {
        let mut sv = StateVector::basis(m, embed(x, &compiled.initial))?;
        for g in compiled.circuit.gates() {
            sv.apply_gate(g);
        }
        let got = sv.amplitudes();
        let mut want = vec![crate::circuit::C64::new(0., 0.); 1 << m];
        for y in 0..1usize << n {
            want[embed(y, &compiled.final_layout)] = u.matrix()[(y, x)];
        }
        let ph = *phase.get_or_insert_with(|| {
            let k = (0..want.len())
                .max_by(|&i, &j| want[i].norm().total_cmp(&want[j].norm()))
                .unwrap();
            let r = got[k] / want[k];
            r / r.norm()
        });
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - ph * w).norm());
        }
    }
    Ok(worst)
}
