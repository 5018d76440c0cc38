//! Time evolution: Bloch-vector and density-matrix integrators, stroboscopic
//! pulse-pair sequences, closed-form fidelities, and the n-qubit statevector
//! kernel.

pub mod analytic;
pub mod bloch;
pub mod master;
pub mod sequence;
pub mod statevector;

pub use analytic::{
    analytic_open_xxbar_exact, analytic_open_xxbar_scalar, analytic_open_yy, closed_fidelity,
    saturation_offset, yy_perturbation_bound, AnalyticParams, ClosedPair,
};
pub use bloch::{
    evolve_bloch, free_propagator, free_trajectory, pulse_propagator, sampled_trajectory,
    AffineMap, PropagatorCache,
};
pub use master::{evolve_density, liouvillian, DensitySystem};
pub use sequence::{run_sequence, ExperimentRecord, PairKind, Preparation, SequenceSpec};
pub use statevector::{statevector_apply, Circuit, Gate, PauliNoise, StateVector};
