//! Quantum circuit simulation on dense state vectors and density matrices.
//!
//! Gates are applied in place by data-parallel pair kernels ([`kernels`]).
//! Density matrices reuse the same kernels on a flattened `2N`-qubit vector
//! ([`density`]). The [`distributed`] module splits a vector over ranks that
//! exchange partitions through a pluggable transport, and [`bench`] measures
//! random circuits under a fixed timing protocol.

pub mod bench;
pub mod circuits;
pub mod density;
pub mod distributed;
pub mod error;
pub mod gates;
pub mod kernels;
pub mod parallel;
pub mod state;

pub use circuits::{Circuit, GateOp};
pub use error::{Error, Result};
pub use gates::{GateMatrix, NamedGate};
pub use parallel::Env;
pub use state::{Amplitude, Precision, Register, RegisterKind};
