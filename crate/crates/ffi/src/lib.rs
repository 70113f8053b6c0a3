//! C ABI for `qbench`.
//!
//! Objects are opaque handles created by `qb_*` constructors and released
//! with the matching `*_free`. Every fallible call returns a [`QbStatus`];
//! on failure `qb_last_error()` describes the problem. Strings returned
//! through out-parameters are released with `qb_string_free`.
//!
//! Handles are not synchronised: use each one from a single thread at a time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qbench::compile::{compile, Compiled, Strategy};
use qbench::device::DeviceModel;
use qbench::gen::CircuitClass;
use qbench::harness::{export_qasm, parse_qasm};
use qbench::metrics::score;
use qbench::sim::{
    output_probabilities, sample_ideal, sample_noisy, sample_uniform, NoiseModel, ProbabilityTable, SampleSet,
};
use qbench::{BenchRng, Circuit, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    WidthExceeded = 3,
    NonUnitary = 4,
    UnsupportedGate = 5,
    InvalidDevice = 6,
    Io = 7,
    Parse = 8,
    Internal = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QbClass {
    Shallow = 0,
    Square = 1,
    Deep = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QbStrategy {
    RoutingOnly = 0,
    LineUnaware = 1,
    NoiseAware = 2,
}

/// Scores of one sample set against an ideal table.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QbScore {
    pub hog: f64,
    pub ideal_hog: f64,
    pub ced: f64,
    pub l1: f64,
}

pub struct QbCircuit(Circuit);
pub struct QbTable(ProbabilityTable);
pub struct QbSamples(SampleSet);
pub struct QbDevice(DeviceModel);
pub struct QbCompiled(Compiled);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> QbStatus {
    match e {
        Error::WidthExceeded { .. } | Error::WidthMismatch { .. } => QbStatus::WidthExceeded,
        Error::NonUnitary(_) => QbStatus::NonUnitary,
        Error::UnsupportedGate(_) | Error::NonNativeGate(_) => QbStatus::UnsupportedGate,
        Error::InvalidDevice(_) | Error::Disconnected => QbStatus::InvalidDevice,
        Error::Io(_) => QbStatus::Io,
        Error::Parse { .. } | Error::Json(_) => QbStatus::Parse,
        _ => QbStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (QbStatus, String)>) -> QbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QbStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            QbStatus::Internal
        }
    }
}

fn lib<T>(r: qbench::Result<T>) -> Result<T, (QbStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null() -> (QbStatus, String) {
    (QbStatus::NullPointer, "null pointer argument".into())
}

unsafe fn get<'a, T>(p: *const T) -> Result<&'a T, (QbStatus, String)> {
    unsafe { p.as_ref() }.ok_or_else(null)
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), (QbStatus, String)> {
    if out.is_null() {
        return Err(null());
    }
    unsafe { *out = Box::into_raw(Box::new(v)) };
    Ok(())
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, (QbStatus, String)> {
    if s.is_null() {
        return Err(null());
    }
    unsafe { CStr::from_ptr(s) }
        .to_str()
        .map_err(|_| (QbStatus::InvalidArgument, "string is not UTF-8".into()))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next `qb_*` call on the same thread.
#[no_mangle]
pub extern "C" fn qb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn qb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn qb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Generates a circuit. `layers == 0` selects the class default.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qb_circuit_generate(
    class: QbClass,
    n_qubits: usize,
    layers: usize,
    seed: u64,
    out: *mut *mut QbCircuit,
) -> QbStatus {
    guard(|| {
        let class = match class {
            QbClass::Shallow => CircuitClass::Shallow,
            QbClass::Square => CircuitClass::Square,
            QbClass::Deep => CircuitClass::Deep,
        };
        let layers = (layers > 0).then_some(layers);
        let c = lib(class.generate(n_qubits, layers, &mut BenchRng::from_seed(seed)))?;
        unsafe { put(out, QbCircuit(c)) }
    })
}

/// # Safety
/// `qasm` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qb_circuit_from_qasm(qasm: *const c_char, out: *mut *mut QbCircuit) -> QbStatus {
    guard(|| {
        let c = lib(parse_qasm(unsafe { text(qasm) }?))?;
        unsafe { put(out, QbCircuit(c)) }
    })
}

/// OpenQASM 2.0 text; release with `qb_string_free`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qb_circuit_to_qasm(circuit: *const QbCircuit, out: *mut *mut c_char) -> QbStatus {
    guard(|| {
        let c = unsafe { get(circuit) }?;
        if out.is_null() {
            return Err(null());
        }
        let s = lib(export_qasm(&c.0))?;
        unsafe {
            *out = CString::new(s)
                .map_err(|_| (QbStatus::Internal, "NUL in QASM".into()))?
                .into_raw()
        };
        Ok(())
    })
}

/// Number of qubits, or 0 for a null handle.
///
/// # Safety
/// `circuit` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn qb_circuit_n_qubits(circuit: *const QbCircuit) -> usize {
    unsafe { circuit.as_ref() }.map_or(0, |c| c.0.n_qubits())
}

/// Number of gates, or 0 for a null handle.
///
/// # Safety
/// `circuit` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn qb_circuit_len(circuit: *const QbCircuit) -> usize {
    unsafe { circuit.as_ref() }.map_or(0, |c| c.0.len())
}

/// Number of two-qubit gates, or 0 for a null handle.
///
/// # Safety
/// `circuit` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn qb_circuit_two_qubit_count(circuit: *const QbCircuit) -> usize {
    unsafe { circuit.as_ref() }.map_or(0, |c| c.0.two_qubit_count())
}

/// # Safety
/// `circuit` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn qb_circuit_free(circuit: *mut QbCircuit) {
    unsafe { free(circuit) }
}

/// Ideal output distribution of a circuit.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qb_probabilities(circuit: *const QbCircuit, out: *mut *mut QbTable) -> QbStatus {
    guard(|| {
        let t = lib(output_probabilities(&unsafe { get(circuit) }?.0))?;
        unsafe { put(out, QbTable(t)) }
    })
}

/// # Safety
/// `table` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn qb_table_n_qubits(table: *const QbTable) -> usize {
    unsafe { table.as_ref() }.map_or(0, |t| t.0.n_qubits())
}

/// Copies the `2^n` probabilities into `buf`, which must hold `len >= 2^n`
/// values. Index bit `n - 1 - i` is qubit `i`.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qb_table_copy(table: *const QbTable, buf: *mut f64, len: usize) -> QbStatus {
    guard(|| {
        let t = unsafe { get(table) }?;
        if buf.is_null() {
            return Err(null());
        }
        let p = t.0.probs();
        if len < p.len() {
            return Err((
                QbStatus::InvalidArgument,
                format!("buffer holds {len} values, need {}", p.len()),
            ));
        }
        unsafe { ptr::copy_nonoverlapping(p.as_ptr(), buf, p.len()) };
        Ok(())
    })
}

/// # Safety
/// `table` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn qb_table_free(table: *mut QbTable) {
    unsafe { free(table) }
}

/// `shots` draws from an ideal table.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qb_sample_ideal(
    table: *const QbTable,
    shots: u64,
    seed: u64,
    out: *mut *mut QbSamples,
) -> QbStatus {
    guard(|| {
        let s = sample_ideal(&unsafe { get(table) }?.0, shots, &mut BenchRng::from_seed(seed));
        unsafe { put(out, QbSamples(s)) }
    })
}

/// `shots` uniformly random bitstrings.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qb_sample_uniform(
    n_qubits: usize,
    shots: u64,
    seed: u64,
    out: *mut *mut QbSamples,
) -> QbStatus {
    guard(|| {
        if n_qubits == 0 || n_qubits > 63 {
            return Err((QbStatus::InvalidArgument, format!("width {n_qubits} out of range")));
        }
        unsafe {
            put(
                out,
                QbSamples(sample_uniform(n_qubits, shots, &mut BenchRng::from_seed(seed))),
            )
        }
    })
}

/// Number of times `outcome` was observed.
///
/// # Safety
/// `samples` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn qb_samples_count(samples: *const QbSamples, outcome: u64) -> u64 {
    unsafe { samples.as_ref() }.map_or(0, |s| s.0.count(outcome))
}

/// # Safety
/// `samples` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn qb_samples_shots(samples: *const QbSamples) -> u64 {
    unsafe { samples.as_ref() }.map_or(0, |s| s.0.shots())
}

/// # Safety
/// `samples` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn qb_samples_free(samples: *mut QbSamples) {
    unsafe { free(samples) }
}

/// HOG, ideal HOG, CED and ℓ1 distance of `samples` against `table`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qb_score(samples: *const QbSamples, table: *const QbTable, out: *mut QbScore) -> QbStatus {
    guard(|| {
        let (s, t) = unsafe { (get(samples)?, get(table)?) };
        if out.is_null() {
            return Err(null());
        }
        let (hog, ideal_hog, ced, l1) = lib(score(&s.0, &t.0))?;
        unsafe {
            *out = QbScore {
                hog,
                ideal_hog,
                ced,
                l1,
            }
        };
        Ok(())
    })
}

/// A bundled device by name (`ibmqx2`, `ibmq_ourense`, `ibmq_16_melbourne`,
/// `ibmq_singapore`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qb_device_builtin(name: *const c_char, out: *mut *mut QbDevice) -> QbStatus {
    guard(|| {
        let d = lib(DeviceModel::builtin(unsafe { text(name) }?))?;
        unsafe { put(out, QbDevice(d)) }
    })
}

/// A device from a JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qb_device_load(path: *const c_char, out: *mut *mut QbDevice) -> QbStatus {
    guard(|| {
        let d = lib(DeviceModel::load(unsafe { text(path) }?))?;
        unsafe { put(out, QbDevice(d)) }
    })
}

/// # Safety
/// `device` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn qb_device_n_qubits(device: *const QbDevice) -> usize {
    unsafe { device.as_ref() }.map_or(0, |d| d.0.n_qubits())
}

/// # Safety
/// `device` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn qb_device_free(device: *mut QbDevice) {
    unsafe { free(device) }
}

/// Compiles `circuit` onto `device`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qb_compile(
    circuit: *const QbCircuit,
    device: *const QbDevice,
    strategy: QbStrategy,
    out: *mut *mut QbCompiled,
) -> QbStatus {
    guard(|| {
        let (c, d) = unsafe { (get(circuit)?, get(device)?) };
        let s = match strategy {
            QbStrategy::RoutingOnly => Strategy::RoutingOnly,
            QbStrategy::LineUnaware => Strategy::LineUnaware,
            QbStrategy::NoiseAware => Strategy::NoiseAware,
        };
        let k = lib(compile(&c.0, &d.0, s))?;
        unsafe { put(out, QbCompiled(k)) }
    })
}

/// A copy of the compiled circuit, on the compact qubit set.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qb_compiled_circuit(compiled: *const QbCompiled, out: *mut *mut QbCircuit) -> QbStatus {
    guard(|| {
        let k = unsafe { get(compiled) }?;
        unsafe { put(out, QbCircuit(k.0.circuit.clone())) }
    })
}

/// Writes the device qubit that holds each virtual qubit at the end of the
/// circuit into `buf[0..n_virtual]`.
///
/// # Safety
/// `buf` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn qb_compiled_final_layout(
    compiled: *const QbCompiled,
    buf: *mut usize,
    len: usize,
) -> QbStatus {
    guard(|| {
        let k = unsafe { get(compiled) }?;
        if buf.is_null() {
            return Err(null());
        }
        let layout: Vec<usize> = k.0.final_layout.iter().map(|&c| k.0.physical[c]).collect();
        if len < layout.len() {
            return Err((
                QbStatus::InvalidArgument,
                format!("buffer holds {len} values, need {}", layout.len()),
            ));
        }
        unsafe { ptr::copy_nonoverlapping(layout.as_ptr(), buf, layout.len()) };
        Ok(())
    })
}

/// Samples the compiled circuit, noiselessly or with the device's
/// calibrated errors, and returns outcomes over the original qubits.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qb_sample_compiled(
    compiled: *const QbCompiled,
    device: *const QbDevice,
    noisy: bool,
    shots: u64,
    seed: u64,
    out: *mut *mut QbSamples,
) -> QbStatus {
    guard(|| {
        let (k, d) = unsafe { (get(compiled)?, get(device)?) };
        let noise = if noisy {
            k.0.noise_model(&d.0)
        } else {
            NoiseModel::ideal(k.0.circuit.n_qubits())
        };
        let raw = lib(sample_noisy(
            &k.0.circuit,
            &noise,
            shots,
            &mut BenchRng::from_seed(seed),
        ))?;
        unsafe { put(out, QbSamples(k.0.unpermute(&raw))) }
    })
}

/// # Safety
/// `compiled` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn qb_compiled_free(compiled: *mut QbCompiled) {
    unsafe { free(compiled) }
}
