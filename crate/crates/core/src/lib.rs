//! Continuous polynomial optimization with QAOA.
//!
//! The pipeline turns an objective written as text into a QAOA run:
//!
//! 1. [`parser`] lowers the expression to a [`ContinuousPoly`].
//! 2. [`encoding`] discretizes every variable with a sign-magnitude bit
//!    layout, producing a PUBO [`BinaryPoly`].
//! 3. [`quadratize`] optionally reduces the PUBO to a QUBO with ancilla bits.
//! 4. [`spin`] maps bits to spins, yielding the diagonal cost Hamiltonian.
//! 5. [`circuit`] synthesizes the layered QAOA circuit and its metrics.
//! 6. [`sim`] simulates it exactly and samples measurement shots.
//! 7. [`optimize`] trains the circuit parameters without gradients.
//!
//! Basis states are indexed with qubit 0 as the most significant bit
//! everywhere, and measured bit 1 corresponds to spin -1.

pub mod circuit;
pub mod encoding;
pub mod optimize;
pub mod parser;
pub mod poly;
pub mod quadratize;
pub mod sim;
pub mod spin;

pub use circuit::{GateCircuit, GateModel};
pub use encoding::{BitLayout, DomainSpec, VarSpec};
pub use poly::{BinaryPoly, ContinuousPoly, SpinPoly};
pub use quadratize::QuadratizationResult;
pub use sim::{SampleSet, StateVector};
