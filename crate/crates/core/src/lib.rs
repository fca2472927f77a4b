//! Qubit computational wires.
//!
//! A wire is a translation-invariant bond-dimension-2 matrix product state
//! over qubits.  This crate classifies such wires into the normal form
//! `B[0] = W/√2`, `B[1] = W·S(φ)/√2`, compiles logical single-qubit gates
//! into measurement sequences, simulates the coupling gadgets that join two
//! wires, and provides an exact state-vector simulator used to check every
//! correlation-space prediction at small sizes.
//!
//! The crate is `no_std` (with `alloc`) when built without the default
//! `std` feature.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bose;
pub mod classify;
pub mod compile;
pub mod coupler;
pub mod error;
pub mod linalg;
pub mod mat;
pub mod mps;
pub mod optimize;
pub mod oracle;
pub mod random;
pub mod trajectory;

pub use bose::FockChain;
pub use classify::{
    classify, equivalent, ClassificationReport, GaugeData, NormalFormWire, Verdict,
};
pub use compile::{compile_su2, CompilationPlan};
pub use coupler::{CouplingGadget, EntanglingGate};
pub use error::{Error, Result};
pub use mat::{Mat2, Mat4, C64};
pub use mps::{BoundaryState, TransferChannel, WireTensor};
pub use oracle::StateVector;

/// Numerical tolerances shared by the library.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Equality checks on matrices and states.
    pub eq: f64,
    /// A transfer channel counts as gapped when `1 − |λ₂|` exceeds this.
    pub gap: f64,
    /// By-product angles below this are treated as degenerate.
    pub degenerate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eq: 1e-9,
            gap: 1e-6,
            degenerate: 1e-6,
        }
    }
}
