//! Qubit-only detection of qubit–environment entanglement under pure
//! dephasing.
//!
//! A qubit is prepared in `|0⟩` or `|1⟩`, left to interact with its
//! environment for a time `τ`, rotated to an equal superposition and then
//! observed for a time `t`. Any difference between the two coherence curves
//! certifies that the joint evolution entangles qubit and environment.
//!
//! Units: time in μs, angular frequencies and couplings in rad·μs⁻¹,
//! lengths in nm, field in tesla.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod dephasing;
pub mod error;
pub mod noise;
pub mod nv;
pub mod output;
pub mod protocol;
pub mod quantum;
pub mod su2;
pub mod verify;

pub use config::{Field, RunConfig};
pub use dephasing::{
    echo_coherence, joint_oracle, protocol_coherence, qee_criterion, DistanceMetric, EntanglementReport, EnvState, Prep,
    PureDephasingModel, DEFAULT_QEE_TOLERANCE,
};
pub use error::{Error, Result};
pub use noise::{noise_coherence, sample_trajectories, streamed_noise_coherence, NoiseKind, NoiseProcess};
pub use nv::{Bath, BathSpec, BathSpin, BathSummary, ContactModel, LatticeConfig};
pub use protocol::{delta_l_analytic, echo_trace, protocol_trace, ProtocolGrid, ProtocolTrace, SpinFactor, TimeGrid, TraceOptions};
pub use quantum::{propagator, ComplexMatrix, HermitianOperator, UnitaryPropagator};
