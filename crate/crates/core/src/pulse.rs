//! Driven-gate pulse parametrization with injected coherent errors, and the
//! three-level (leakage) extension.
//!
//! All quantities are SI internally: durations in seconds, rates and
//! amplitudes in rad/s, angles in radians. A pulse occupies a gate window of
//! duration `t_g` with the drive active only during a centered window of
//! duration `tau <= t_g`; the detuning error is likewise gated to the active
//! window (it is drive-induced).

use crate::linalg::{c, cr, CMat};
use crate::{Error, Result};

pub const DEFAULT_GATE_DURATION: f64 = 88e-9;
pub const DEFAULT_ACTIVE_WINDOW: f64 = 80e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    /// Drive phase in the equatorial plane: x = 0, y = pi/2.
    pub fn phase(self) -> f64 {
        match self {
            Axis::X => 0.0,
            Axis::Y => std::f64::consts::FRAC_PI_2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    /// Constant amplitude `theta/tau` over the active window.
    Square,
    /// `(2 theta/tau) sin^2(pi (t - t0)/tau)` over the active window; the
    /// normalization makes the integral equal `theta` exactly.
    Cosine,
}

/// A single-qubit gate pulse with injected coherent errors.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PulseSpec {
    pub axis: Axis,
    /// +1 for positive rotations, -1 for negative (drive amplitude and
    /// amplitude error are both negated; detuning is sign independent).
    pub sign: i8,
    /// Nominal rotation angle in radians (integral of the error-free drive).
    pub nominal_angle: f64,
    /// Gate duration in seconds (active window plus symmetric padding).
    pub gate_duration: f64,
    /// Active drive window in seconds.
    pub active_window: f64,
    pub envelope: Envelope,
    /// Additive amplitude error in rad/s, applied over the active window.
    pub amplitude_error: f64,
    /// Detuning error in rad/s, applied over the active window.
    pub detuning_error: f64,
}

impl PulseSpec {
    pub fn new(
        axis: Axis,
        sign: i8,
        nominal_angle: f64,
        gate_duration: f64,
        active_window: f64,
        envelope: Envelope,
    ) -> Result<Self> {
        if nominal_angle <= 0.0 {
            return Err(Error::InvalidParameter(
                "nominal angle must be positive; use sign for direction".into(),
            ));
        }
        if gate_duration <= 0.0 || active_window <= 0.0 || active_window > gate_duration {
            return Err(Error::InvalidParameter(format!(
                "bad pulse geometry: t_g = {gate_duration}, tau = {active_window}"
            )));
        }
        if sign != 1 && sign != -1 {
            return Err(Error::InvalidParameter("sign must be +1 or -1".into()));
        }
        Ok(Self {
            axis,
            sign,
            nominal_angle,
            gate_duration,
            active_window,
            envelope,
            amplitude_error: 0.0,
            detuning_error: 0.0,
        })
    }

    /// Square pi pulse filling the whole gate window; the geometry assumed by
    /// the analytic fidelity formulas.
    pub fn square_pi(axis: Axis, sign: i8) -> Self {
        Self::new(
            axis,
            sign,
            std::f64::consts::PI,
            DEFAULT_GATE_DURATION,
            DEFAULT_GATE_DURATION,
            Envelope::Square,
        )
        .unwrap()
    }

    /// Cosine-envelope pi pulse with the 80 ns active window and 4 ns
    /// padding on both sides (t_g = 88 ns).
    pub fn cosine_pi(axis: Axis, sign: i8) -> Self {
        Self::new(
            axis,
            sign,
            std::f64::consts::PI,
            DEFAULT_GATE_DURATION,
            DEFAULT_ACTIVE_WINDOW,
            Envelope::Cosine,
        )
        .unwrap()
    }

    /// Inject coherent errors given as angle errors, converting through the
    /// gate-duration convention `delta_theta = eps' * t_g` and
    /// `delta_phi = delta * t_g / theta`.
    pub fn with_angle_errors(mut self, delta_theta: f64, delta_phi: f64) -> Self {
        self.amplitude_error = delta_theta / self.gate_duration;
        self.detuning_error = delta_phi * self.nominal_angle / self.gate_duration;
        self
    }

    pub fn with_rate_errors(mut self, amplitude_error: f64, detuning_error: f64) -> Self {
        self.amplitude_error = amplitude_error;
        self.detuning_error = detuning_error;
        self
    }

    /// Average nominal drive amplitude `theta / t_g`.
    pub fn mean_amplitude(&self) -> f64 {
        self.nominal_angle / self.gate_duration
    }

    /// Padding before the active window.
    pub fn padding(&self) -> f64 {
        0.5 * (self.gate_duration - self.active_window)
    }

    /// Nominal (error-free, unsigned) envelope amplitude at time `t` within
    /// the gate window; zero during padding.
    pub fn envelope_amplitude(&self, t: f64) -> f64 {
        let t0 = self.padding();
        let tau = self.active_window;
        if t < t0 || t > t0 + tau {
            return 0.0;
        }
        match self.envelope {
            Envelope::Square => self.nominal_angle / tau,
            Envelope::Cosine => {
                let s = (std::f64::consts::PI * (t - t0) / tau).sin();
                2.0 * self.nominal_angle / tau * s * s
            }
        }
    }

    /// True while the drive (and thus the drive-induced detuning) is on.
    pub fn in_active_window(&self, t: f64) -> bool {
        let t0 = self.padding();
        t >= t0 && t <= t0 + self.active_window
    }
}

/// A pulse with an arbitrary equatorial drive phase, the form the dynamics
/// kernels consume. `PulseSpec` converts into this; composite sequences
/// (UR6) construct phased pulses directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivePulse {
    /// Drive phase in the equatorial plane (x = 0, y = pi/2).
    pub phase: f64,
    pub sign: f64,
    pub nominal_angle: f64,
    pub gate_duration: f64,
    pub active_window: f64,
    pub envelope: Envelope,
    pub amplitude_error: f64,
    pub detuning_error: f64,
}

impl DrivePulse {
    /// Idle for `duration` (no drive, no detuning).
    pub fn free(duration: f64) -> Self {
        Self {
            phase: 0.0,
            sign: 1.0,
            nominal_angle: 0.0,
            gate_duration: duration,
            active_window: duration,
            envelope: Envelope::Square,
            amplitude_error: 0.0,
            detuning_error: 0.0,
        }
    }

    /// The same pulse rotated to drive phase `phase` (errors carried along).
    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn padding(&self) -> f64 {
        0.5 * (self.gate_duration - self.active_window)
    }

    pub fn is_free(&self) -> bool {
        self.nominal_angle == 0.0 && self.amplitude_error == 0.0 && self.detuning_error == 0.0
    }

    pub fn envelope_amplitude(&self, t: f64) -> f64 {
        if self.nominal_angle == 0.0 {
            return 0.0;
        }
        let t0 = self.padding();
        let tau = self.active_window;
        if t < t0 || t > t0 + tau {
            return 0.0;
        }
        match self.envelope {
            Envelope::Square => self.nominal_angle / tau,
            Envelope::Cosine => {
                let s = (std::f64::consts::PI * (t - t0) / tau).sin();
                2.0 * self.nominal_angle / tau * s * s
            }
        }
    }

    pub fn in_active_window(&self, t: f64) -> bool {
        let t0 = self.padding();
        t >= t0 && t <= t0 + self.active_window
    }

    /// Bloch drive vector `h(t)` (rad/s): equatorial drive of magnitude
    /// `sign (eps(t) + eps')` at the stored phase plus the gated detuning
    /// along z.
    pub fn bloch_drive(&self, t: f64) -> nalgebra::Vector3<f64> {
        if !self.in_active_window(t) || self.is_free() {
            return nalgebra::Vector3::zeros();
        }
        let amp = self.sign * (self.envelope_amplitude(t) + self.amplitude_error);
        nalgebra::Vector3::new(
            amp * self.phase.cos(),
            amp * self.phase.sin(),
            self.detuning_error,
        )
    }

    /// Two-level Hamiltonian `h(t) . sigma / 2`.
    pub fn hamiltonian_qubit(&self, t: f64) -> CMat {
        let h = self.bloch_drive(t);
        let mut m = CMat::zeros(2, 2);
        m[(0, 1)] = c(0.5 * h.x, -0.5 * h.y);
        m[(1, 0)] = c(0.5 * h.x, 0.5 * h.y);
        m[(0, 0)] = cr(0.5 * h.z);
        m[(1, 1)] = cr(-0.5 * h.z);
        m
    }

    /// Three-level Hamiltonian with the 1->2 coupling scaled by the leakage
    /// matrix-element ratio and the anharmonicity on the diagonal.
    pub fn hamiltonian_qutrit(&self, lp: &LeakageParams, t: f64) -> CMat {
        let mut m = CMat::zeros(3, 3);
        m[(2, 2)] = cr(lp.anharmonicity);
        if self.in_active_window(t) && !self.is_free() {
            let amp = 0.5 * self.sign * (self.envelope_amplitude(t) + self.amplitude_error);
            let low = c(self.phase.cos(), -self.phase.sin()) * cr(amp);
            m[(0, 1)] = low;
            m[(1, 0)] = low.conj();
            let high = low * cr(lp.matrix_element_ratio);
            m[(1, 2)] = high;
            m[(2, 1)] = high.conj();
            m[(0, 0)] += cr(0.5 * self.detuning_error);
            m[(1, 1)] -= cr(0.5 * self.detuning_error);
        }
        m
    }
}

impl From<&PulseSpec> for DrivePulse {
    fn from(spec: &PulseSpec) -> Self {
        Self {
            phase: spec.axis.phase(),
            sign: spec.sign as f64,
            nominal_angle: spec.nominal_angle,
            gate_duration: spec.gate_duration,
            active_window: spec.active_window,
            envelope: spec.envelope,
            amplitude_error: spec.amplitude_error,
            detuning_error: spec.detuning_error,
        }
    }
}

impl PulseSpec {
    pub fn drive(&self) -> DrivePulse {
        DrivePulse::from(self)
    }
}

/// Rotation and phase errors `(delta_theta, delta_phi)` implied by the
/// stored rates: `delta_theta = eps' t_g`, `delta_phi = delta t_g / theta`.
pub fn coherent_errors(spec: &PulseSpec) -> Result<(f64, f64)> {
    if spec.nominal_angle == 0.0 {
        return Err(Error::InvalidParameter(
            "phase error undefined for zero nominal angle".into(),
        ));
    }
    let dtheta = spec.amplitude_error * spec.gate_duration;
    let dphi = spec.detuning_error * spec.gate_duration / spec.nominal_angle;
    Ok((dtheta, dphi))
}

/// Second-order rotation error induced by a pure detuning error:
/// `(1/2) theta delta_phi^2`.
pub fn induced_rotation_error(delta_phi: f64, theta: f64) -> f64 {
    0.5 * theta * delta_phi * delta_phi
}

/// Two-level gate Hamiltonian at time `t` within the pulse window:
/// `H(t) = sign (eps(t) + eps') sigma_axis / 2 + delta sigma_z / 2` during
/// the active window and zero during padding.
pub fn gate_hamiltonian(spec: &PulseSpec, t: f64) -> Result<CMat> {
    if t < 0.0 || t > spec.gate_duration {
        return Err(Error::InvalidParameter(format!(
            "t = {t} outside pulse window [0, {}]",
            spec.gate_duration
        )));
    }
    let mut h = CMat::zeros(2, 2);
    if spec.in_active_window(t) {
        let amp = 0.5 * spec.sign as f64 * (spec.envelope_amplitude(t) + spec.amplitude_error);
        let phase = spec.axis.phase();
        h[(0, 1)] = c(phase.cos(), -phase.sin()) * cr(amp);
        h[(1, 0)] = c(phase.cos(), phase.sin()) * cr(amp);
        h[(0, 0)] += cr(0.5 * spec.detuning_error);
        h[(1, 1)] -= cr(0.5 * spec.detuning_error);
    }
    Ok(h)
}

/// Qutrit leakage model: anharmonic third level and drive matrix element
/// ratio (sqrt(2) for a transmon-like ladder).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageParams {
    /// Detuning of the 1->2 transition from the 0->1 transition, rad/s.
    pub anharmonicity: f64,
    /// Ratio of the 1->2 to the 0->1 drive matrix element.
    pub matrix_element_ratio: f64,
}

impl LeakageParams {
    pub fn new(anharmonicity: f64, matrix_element_ratio: f64) -> Result<Self> {
        if anharmonicity == 0.0 {
            return Err(Error::InvalidParameter(
                "anharmonicity must be nonzero".into(),
            ));
        }
        Ok(Self {
            anharmonicity,
            matrix_element_ratio,
        })
    }

    /// Transmon-like defaults: -2 pi * 150 MHz anharmonicity, sqrt(2) ratio.
    pub fn transmon_like() -> Self {
        Self {
            anharmonicity: -2.0 * std::f64::consts::PI * 150e6,
            matrix_element_ratio: std::f64::consts::SQRT_2,
        }
    }
}

/// Three-level gate Hamiltonian in the drive frame: the drive couples
/// 0<->1 with `eps(t)/2` and 1<->2 with `ratio * eps(t)/2`; the diagonal is
/// `(0, 0, anharmonicity)`.
pub fn qutrit_hamiltonian(spec: &PulseSpec, lp: &LeakageParams, t: f64) -> Result<CMat> {
    if t < 0.0 || t > spec.gate_duration {
        return Err(Error::InvalidParameter(format!(
            "t = {t} outside pulse window [0, {}]",
            spec.gate_duration
        )));
    }
    let mut h = CMat::zeros(3, 3);
    h[(2, 2)] = cr(lp.anharmonicity);
    if spec.in_active_window(t) {
        let amp = 0.5 * spec.sign as f64 * (spec.envelope_amplitude(t) + spec.amplitude_error);
        let phase = spec.axis.phase();
        let low = c(phase.cos(), -phase.sin()) * cr(amp);
        h[(0, 1)] = low;
        h[(1, 0)] = low.conj();
        let high = low * cr(lp.matrix_element_ratio);
        h[(1, 2)] = high;
        h[(2, 1)] = high.conj();
        h[(0, 0)] += cr(0.5 * spec.detuning_error);
        h[(1, 1)] -= cr(0.5 * spec.detuning_error);
        // the detuning acts within the qubit subspace only
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use std::f64::consts::PI;

    #[test]
    fn square_pulse_mid_amplitude() {
        let spec = PulseSpec::square_pi(Axis::X, 1);
        let h = gate_hamiltonian(&spec, 0.5 * spec.gate_duration).unwrap();
        // (pi / tau) sigma_x / 2
        let expect = crate::pauli::PauliOp::X
            .matrix()
            .scale(0.5 * PI / spec.active_window);
        assert!(max_abs_diff(&h, &expect) < 1e-6);
    }

    #[test]
    fn cosine_peak_amplitude() {
        let spec = PulseSpec::cosine_pi(Axis::Y, 1);
        let center = 0.5 * spec.gate_duration;
        let h = gate_hamiltonian(&spec, center).unwrap();
        let peak = 2.0 * PI / spec.active_window;
        let expect = crate::pauli::PauliOp::Y.matrix().scale(0.5 * peak);
        assert!(max_abs_diff(&h, &expect) < 1e-6);
    }

    #[test]
    fn envelopes_integrate_to_theta() {
        for envelope in [Envelope::Square, Envelope::Cosine] {
            for (t_g, tau) in [(88e-9, 88e-9), (88e-9, 80e-9), (20e-9, 20e-9)] {
                let spec = PulseSpec::new(Axis::X, 1, 1.234, t_g, tau, envelope).unwrap();
                // Simpson's rule over the active window, where the envelope
                // is smooth (it vanishes identically outside)
                let start = spec.padding();
                let n = 20_000;
                let dt = tau / n as f64;
                let mut acc = 0.0;
                for i in 0..n {
                    let t0 = start + i as f64 * dt;
                    acc += dt / 6.0
                        * (spec.envelope_amplitude(t0)
                            + 4.0 * spec.envelope_amplitude(t0 + 0.5 * dt)
                            + spec.envelope_amplitude((t0 + dt).min(start + tau)));
                }
                assert!(
                    (acc - 1.234).abs() / 1.234 < 1e-9,
                    "{envelope:?} integral {acc}"
                );
            }
        }
    }

    #[test]
    fn padding_has_zero_hamiltonian() {
        let spec = PulseSpec::cosine_pi(Axis::X, 1).with_angle_errors(0.01, 0.01);
        let h = gate_hamiltonian(&spec, 1e-9).unwrap();
        assert!(max_abs_diff(&h, &CMat::zeros(2, 2)) < 1e-30);
    }

    #[test]
    fn coherent_error_roundtrip() {
        let dtheta = 0.398f64.to_radians();
        let dphi = 0.426f64.to_radians();
        let spec = PulseSpec::square_pi(Axis::X, 1).with_angle_errors(dtheta, dphi);
        let (t, p) = coherent_errors(&spec).unwrap();
        assert!((t - dtheta).abs() < 1e-15);
        assert!((p - dphi).abs() < 1e-15);
        // delta = eps_bar * delta_phi recovers the stored detuning
        let expect = spec.mean_amplitude() * dphi;
        assert!((spec.detuning_error - expect).abs() / expect < 1e-12);
    }

    #[test]
    fn zero_errors_zero_angles() {
        let spec = PulseSpec::square_pi(Axis::Y, -1);
        let (t, p) = coherent_errors(&spec).unwrap();
        assert_eq!(t, 0.0);
        assert_eq!(p, 0.0);
    }

    #[test]
    fn amplitude_error_arithmetic() {
        // eps' = 0.1 rad/s over t_g = 88 ns gives 8.8e-9 rad
        let spec = PulseSpec::square_pi(Axis::X, 1).with_rate_errors(0.1, 0.0);
        let (t, _) = coherent_errors(&spec).unwrap();
        assert!((t - 8.8e-9).abs() < 1e-18);
    }

    #[test]
    fn induced_rotation_error_magnitude() {
        assert_eq!(induced_rotation_error(0.0, PI), 0.0);
        // 0.90 degrees of phase error on a pi pulse induces about 0.02 deg
        let ind = induced_rotation_error(0.90f64.to_radians(), PI);
        assert!((ind.to_degrees() - 0.0222).abs() < 2e-3);
        // quadratic scaling
        let quarter = induced_rotation_error(0.45f64.to_radians(), PI);
        assert!((ind / quarter - 4.0).abs() < 1e-9);
    }

    #[test]
    fn qutrit_reduces_to_qubit_block() {
        let spec = PulseSpec::cosine_pi(Axis::X, 1).with_angle_errors(0.002, 0.003);
        let lp = LeakageParams::new(-2.0 * PI * 150e6, 0.0).unwrap();
        let t = 0.4 * spec.gate_duration;
        let h3 = qutrit_hamiltonian(&spec, &lp, t).unwrap();
        let h2 = gate_hamiltonian(&spec, t).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((h3[(i, j)] - h2[(i, j)]).norm() < 1e-12);
            }
        }
        assert!((h3[(2, 2)].re - lp.anharmonicity).abs() < 1.0);
    }

    #[test]
    fn qutrit_idle_is_diagonal() {
        let spec = PulseSpec::cosine_pi(Axis::X, 1);
        let lp = LeakageParams::transmon_like();
        let h = qutrit_hamiltonian(&spec, &lp, 1e-9).unwrap();
        let mut expect = CMat::zeros(3, 3);
        expect[(2, 2)] = cr(lp.anharmonicity);
        assert!(max_abs_diff(&h, &expect) < 1e-9);
    }

    #[test]
    fn drive_pulse_matches_gate_hamiltonian() {
        let spec = PulseSpec::cosine_pi(Axis::Y, -1).with_angle_errors(0.004, -0.006);
        let d = spec.drive();
        for frac in [0.0, 0.03, 0.2, 0.5, 0.86, 1.0] {
            let t = frac * spec.gate_duration;
            let a = gate_hamiltonian(&spec, t).unwrap();
            let b = d.hamiltonian_qubit(t);
            assert!(max_abs_diff(&a, &b) < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn out_of_window_errors() {
        let spec = PulseSpec::square_pi(Axis::X, 1);
        assert!(gate_hamiltonian(&spec, -1e-12).is_err());
        assert!(gate_hamiltonian(&spec, spec.gate_duration + 1e-12).is_err());
    }
}
