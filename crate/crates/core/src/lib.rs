//! Construction, simulation, and T-count accounting of Clifford+T circuits
//! for bilinear interpolation of NEQR-encoded grayscale images.
//!
//! The crate builds measurement-assisted arithmetic (temporary-AND based
//! adders, subtractors, and multipliers), composes them into whole
//! image-rescaling circuits, prices them in T gates, and checks the circuits
//! bit-for-bit against classical oracles with permutation and statevector
//! backends.
//!
//! `no_std` with `alloc`; file formats and the command-line front end live
//! in the companion `qbilerp-cli` crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod arithmetic;
pub mod bilerp;
pub mod circuit;
pub mod gadgets;
pub mod neqr;
pub mod oracle;
pub mod resources;
pub mod simulator;

pub use circuit::{
    CbitId, Circuit, CircuitError, Gate, GateKind, InitialState, MagicPrep, QubitId, Register,
    RegisterRole,
};
pub use num_complex::Complex64;
pub use resources::{count_resources, Design, ResourceReport};
pub use simulator::{
    assert_equivalence, run_permutation, run_statevector, BranchPolicy, ClassicalState,
    MeasurementRecord, Reference, RunOptions, SimError, SimOutcome, StateVector,
};
