use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("circuit width {width} exceeds the limit of {limit} qubits")]
    WidthExceeded { width: usize, limit: usize },

    #[error("malformed gate: {0}")]
    MalformedGate(String),

    #[error("no valid graph found after {attempts} rejection-sampling attempts")]
    BudgetExceeded { attempts: u64 },

    #[error("pauli string has empty support")]
    EmptySupport,

    #[error("width mismatch: {left} vs {right} qubits")]
    WidthMismatch { left: usize, right: usize },

    #[error("gate {0} is not in the native gate set {{U1, U2, U3, CX}}")]
    NonNativeGate(String),

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("degenerate variance in regression input")]
    DegenerateVariance,

    #[error("graph is disconnected")]
    Disconnected,

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NonUnitary(f64),

    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),

    #[error("invalid device: {0}")]
    InvalidDevice(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
