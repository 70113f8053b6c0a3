//! Full-stack quantum benchmarking.
//!
//! The crate generates three application-motivated circuit classes (shallow
//! IQP, square random, deep Pauli-gadget), compiles them onto device models,
//! runs them on an ideal or noisy statevector simulator and scores the results
//! with heavy-output generation, cross-entropy difference and ℓ1 distance.
//!
//! Bitstring convention used everywhere: character `i` of a bitstring (left to
//! right) reports qubit `i`, so qubit 0 is the most significant bit of the
//! integer index into a probability table.

pub mod analysis;
pub mod circuit;
pub mod compile;
pub mod device;
pub mod error;
pub mod gen;
pub mod harness;
pub mod metrics;
pub mod rng;
pub mod sim;

pub use circuit::{Circuit, Gate, GateKind, GateTag, UnitaryMatrix};
pub use error::{Error, Result};
pub use rng::BenchRng;
