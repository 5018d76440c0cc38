//! Shared fixtures for the criterion benchmarks.

use qubench_core::{Axis, NoiseParams, PulseSpec};

pub fn reference_noise() -> NoiseParams {
    NoiseParams::new(23.36e-6, 44.13e-6).unwrap()
}

pub fn square_pi_with_errors() -> PulseSpec {
    PulseSpec::square_pi(Axis::X, 1)
        .with_angle_errors(0.398f64.to_radians(), 0.426f64.to_radians())
}

pub fn cosine_pi_with_errors() -> PulseSpec {
    PulseSpec::cosine_pi(Axis::X, 1)
        .with_angle_errors(0.398f64.to_radians(), 0.426f64.to_radians())
}
