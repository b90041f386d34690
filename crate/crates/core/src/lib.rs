//! Analysis and synthesis of two-qubit gates around the B gate.
//!
//! * [`matrix`]: fixed-size complex matrices, exponentials, Haar sampling.
//! * [`invariants`]: local invariants and local equivalence.
//! * [`weyl`]: Weyl-chamber coordinates and the KAK decomposition.
//! * [`synth`]: exact synthesis from two B gates and six single-qubit gates.
//! * [`josephson`]: single-pulse generation of B and CNOT with inductively
//!   coupled Josephson qubits.
//! * [`circuit`]: two-wire circuits, evaluation and JSON exchange format.

pub mod circuit;
pub mod error;
pub mod gates;
pub mod invariants;
pub mod josephson;
pub mod json;
pub mod matrix;
pub mod synth;
pub mod weyl;

pub use error::{Error, Result};
pub use invariants::{LocalInvariants, TraceInvariants};
pub use matrix::{Hermitian4, Pauli, Unitary2, Unitary4};
pub use weyl::{KakDecomposition, WeylPoint};
