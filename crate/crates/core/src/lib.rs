//! Noisy single-qubit gate simulation and benchmarking protocols.
//!
//! The crate simulates driven qubit (and qutrit) dynamics under Markovian
//! decoherence with injected coherent errors, and implements the
//! benchmarking protocols built on top of that machinery: deterministic
//! benchmarking with fixed pulse-pair sequences, randomized and interleaved
//! benchmarking, process tomography (standard, ancilla-assisted, direct),
//! gate set tomography, direct fidelity estimation, process fidelity
//! estimation, and cross-entropy benchmarking of random circuits, together
//! with the nonlinear least-squares engine that recovers noise parameters
//! from experiment records.

pub mod channel;
pub mod dynamics;
pub mod error;
pub mod fitting;
pub mod io;
pub mod linalg;
pub mod noise;
pub mod pauli;
pub mod protocols;
pub mod pulse;
pub mod rng;
pub mod state;
pub mod tomography;

pub use channel::{
    avg_gate_fidelity_depolarizing, depolarizing_channel, process_fidelity, uhlmann_fidelity,
    ProcessMatrix, QuantumChannel, Representation,
};
pub use error::{Error, Result};
pub use linalg::{CMat, CVec, RMat, C64};
pub use noise::{dissipator_bloch, lindblad_operators, thermal_rates, NoiseParams};
pub use pauli::{pauli_basis, PauliOp, PauliString};
pub use pulse::{
    coherent_errors, gate_hamiltonian, induced_rotation_error, qutrit_hamiltonian, Axis, Envelope,
    LeakageParams, PulseSpec,
};
pub use state::{measure_projective, BlochState, DensityMatrix};
