//! Bloch-vector time evolution.
//!
//! The master equation in Bloch form is `v' = h x v + R v + c`. Segments
//! with constant `h` (square pulses, free evolution, padding) propagate
//! exactly through the matrix exponential of the homogenized 4x4 generator
//! `[[G, c], [0, 0]]` with `G = cross(h) + R`; cosine envelopes integrate
//! the affine propagator with fixed-step RK4 and a step-halving validation.

use std::collections::HashMap;

use nalgebra::{Matrix3, Matrix4, Vector3};

use crate::noise::{dissipator_bloch, NoiseParams};
use crate::pulse::{DrivePulse, Envelope};
use crate::state::BlochState;
use crate::{Error, Result};

/// RK4 substeps per active window for cosine envelopes.
pub const RK4_STEPS_PER_WINDOW: usize = 2000;
/// Step-halving acceptance threshold on the propagator entries.
pub const RK4_HALVING_TOL: f64 = 1e-9;

/// Affine map `v -> M v + b` on Bloch vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub m: Matrix3<f64>,
    pub b: Vector3<f64>,
}

impl AffineMap {
    pub fn identity() -> Self {
        Self {
            m: Matrix3::identity(),
            b: Vector3::zeros(),
        }
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.m * v + self.b
    }

    /// `later ∘ self` (self acts first).
    pub fn then(&self, later: &AffineMap) -> AffineMap {
        AffineMap {
            m: later.m * self.m,
            b: later.m * self.b + later.b,
        }
    }

    /// Exact propagator over `dt` for constant generator `(g, c)`.
    pub fn from_generator(g: &Matrix3<f64>, c: &Vector3<f64>, dt: f64) -> Self {
        let mut a = Matrix4::zeros();
        for i in 0..3 {
            for j in 0..3 {
                a[(i, j)] = g[(i, j)] * dt;
            }
            a[(i, 3)] = c[i] * dt;
        }
        let e = a.exp();
        let mut m = Matrix3::zeros();
        let mut b = Vector3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = e[(i, j)];
            }
            b[i] = e[(i, 3)];
        }
        Self { m, b }
    }
}

/// Cross-product matrix `K(h) v = h x v`.
pub fn cross_matrix(h: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -h.z, h.y, h.z, 0.0, -h.x, -h.y, h.x, 0.0)
}

/// Bloch generator `G = cross(h) + R` for a constant drive.
pub fn bloch_generator(h: &Vector3<f64>, np: &NoiseParams) -> (Matrix3<f64>, Vector3<f64>) {
    let (r, c) = dissipator_bloch(np);
    (cross_matrix(h) + r, c)
}

/// Free evolution over `duration`.
pub fn free_propagator(np: &NoiseParams, duration: f64) -> AffineMap {
    let (g, c) = bloch_generator(&Vector3::zeros(), np);
    AffineMap::from_generator(&g, &c, duration)
}

/// RK4 on the homogenized 4x4 propagator `P' = A(t) P`, `P(0) = I`.
fn rk4_affine<A: Fn(f64) -> Matrix4<f64>>(a_of: A, t0: f64, duration: f64, steps: usize)
    -> AffineMap {
    let dt = duration / steps as f64;
    let mut p = Matrix4::identity();
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        let k1 = a_of(t) * p;
        let k2 = a_of(t + 0.5 * dt) * (p + k1.scale(0.5 * dt));
        let k3 = a_of(t + 0.5 * dt) * (p + k2.scale(0.5 * dt));
        let k4 = a_of(t + dt) * (p + k3.scale(dt));
        p += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(dt / 6.0);
    }
    let mut m = Matrix3::zeros();
    let mut b = Vector3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j)] = p[(i, j)];
        }
        b[i] = p[(i, 3)];
    }
    AffineMap { m, b }
}

fn homogenized(g: Matrix3<f64>, c: &Vector3<f64>) -> Matrix4<f64> {
    let mut a = Matrix4::zeros();
    for i in 0..3 {
        for j in 0..3 {
            a[(i, j)] = g[(i, j)];
        }
        a[(i, 3)] = c[i];
    }
    a
}

/// RK4 over the active window of a pulse; evaluation times are clamped into
/// the window so round-off at the edges cannot drop the gated detuning.
fn rk4_propagator(
    pulse: &DrivePulse,
    np: &NoiseParams,
    t0: f64,
    duration: f64,
    steps: usize,
) -> AffineMap {
    let (r, c) = dissipator_bloch(np);
    let lo = pulse.padding();
    let hi = lo + pulse.active_window;
    let a_of = |t: f64| -> Matrix4<f64> {
        let g = cross_matrix(&pulse.bloch_drive(t.clamp(lo, hi))) + r;
        homogenized(g, &c)
    };
    rk4_affine(a_of, t0, duration, steps)
}

/// RK4 over an arbitrary sub-interval of the gate window (trajectory
/// sampling); evaluation times are not clamped, so intervals straddling the
/// window edge see the true discontinuous drive.
fn rk4_propagator_unclamped(
    pulse: &DrivePulse,
    np: &NoiseParams,
    t0: f64,
    duration: f64,
    steps: usize,
) -> AffineMap {
    let (r, c) = dissipator_bloch(np);
    let a_of = |t: f64| -> Matrix4<f64> {
        let g = cross_matrix(&pulse.bloch_drive(t)) + r;
        homogenized(g, &c)
    };
    rk4_affine(a_of, t0, duration, steps)
}

/// Compile one pulse into its exact (or validated RK4) affine propagator
/// over the full gate window, padding included.
pub fn pulse_propagator(pulse: &DrivePulse, np: &NoiseParams) -> Result<AffineMap> {
    let pad = pulse.padding();
    let mut map = AffineMap::identity();
    if pad > 0.0 {
        map = map.then(&free_propagator(np, pad));
    }
    let active = match (pulse.envelope, pulse.is_free()) {
        (_, true) | (Envelope::Square, false) => {
            // constant drive over the active window
            let t_mid = pad + 0.5 * pulse.active_window;
            let (g, c) = bloch_generator(&pulse.bloch_drive(t_mid), np);
            AffineMap::from_generator(&g, &c, pulse.active_window)
        }
        (Envelope::Cosine, false) => {
            let coarse = rk4_propagator(pulse, np, pad, pulse.active_window, RK4_STEPS_PER_WINDOW);
            let fine =
                rk4_propagator(pulse, np, pad, pulse.active_window, 2 * RK4_STEPS_PER_WINDOW);
            let defect = (coarse.m - fine.m)
                .iter()
                .chain((coarse.b - fine.b).iter())
                .map(|x| x.abs())
                .fold(0.0, f64::max);
            if defect > RK4_HALVING_TOL {
                return Err(Error::Integrator(format!(
                    "RK4 step-halving defect {defect:.3e} exceeds {RK4_HALVING_TOL:.1e}"
                )));
            }
            fine
        }
    };
    map = map.then(&active);
    if pad > 0.0 {
        map = map.then(&free_propagator(np, pad));
    }
    Ok(map)
}

/// Cache of compiled pulse propagators keyed by the exact bit patterns of
/// the pulse and noise parameters. Build-once, then read-only.
#[derive(Debug, Default)]
pub struct PropagatorCache {
    map: HashMap<CacheKey, AffineMap>,
}

#[derive(Debug, PartialEq, Eq, Hash)]
struct CacheKey(Vec<u64>);

fn cache_key(pulse: &DrivePulse, np: &NoiseParams) -> CacheKey {
    CacheKey(vec![
        pulse.phase.to_bits(),
        pulse.sign.to_bits(),
        pulse.nominal_angle.to_bits(),
        pulse.gate_duration.to_bits(),
        pulse.active_window.to_bits(),
        pulse.envelope as u64,
        pulse.amplitude_error.to_bits(),
        pulse.detuning_error.to_bits(),
        np.t1.to_bits(),
        np.t2.to_bits(),
        np.eta.to_bits(),
    ])
}

impl PropagatorCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_compile(&mut self, pulse: &DrivePulse, np: &NoiseParams) -> Result<AffineMap> {
        let key = cache_key(pulse, np);
        if let Some(m) = self.map.get(&key) {
            return Ok(*m);
        }
        let m = pulse_propagator(pulse, np)?;
        self.map.insert(key, m);
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Evolve through a pulse train, returning the state after every pulse
/// (index 0 is the initial state). The norm guard rejects trajectories that
/// leave the Bloch ball beyond integration tolerance.
pub fn evolve_bloch(
    pulses: &[DrivePulse],
    np: &NoiseParams,
    v0: &BlochState,
) -> Result<Vec<BlochState>> {
    let mut cache = PropagatorCache::new();
    let mut out = Vec::with_capacity(pulses.len() + 1);
    let mut v = v0.v;
    out.push(BlochState::new(v));
    for p in pulses {
        let map = cache.get_or_compile(p, np)?;
        v = map.apply(&v);
        let n = v.norm();
        if n > 1.0 + 1e-6 {
            return Err(Error::Integrator(format!(
                "Bloch norm {n} escaped the unit ball"
            )));
        }
        out.push(BlochState::new(v));
    }
    Ok(out)
}

/// Free evolution of a Bloch vector sampled at the given times.
pub fn free_trajectory(np: &NoiseParams, v0: &BlochState, times: &[f64]) -> Vec<BlochState> {
    times
        .iter()
        .map(|&t| BlochState::new(free_propagator(np, t).apply(&v0.v)))
        .collect()
}

/// Finely sampled trajectory through a pulse train for trajectory dumps:
/// `samples_per_pulse` equally spaced points inside every gate window.
pub fn sampled_trajectory(
    pulses: &[DrivePulse],
    np: &NoiseParams,
    v0: &BlochState,
    samples_per_pulse: usize,
) -> Result<Vec<(f64, BlochState)>> {
    let mut out = vec![(0.0, *v0)];
    let mut v = v0.v;
    let mut t_base = 0.0;
    for p in pulses {
        let dt = p.gate_duration / samples_per_pulse as f64;
        let (r, c) = dissipator_bloch(np);
        for k in 0..samples_per_pulse {
            let t0 = k as f64 * dt;
            match p.envelope {
                Envelope::Square => {
                    // piecewise constant between sample points; split at the
                    // window edges so the constant-h assumption holds exactly
                    let mut s = t0;
                    let stops = [p.padding(), p.padding() + p.active_window, t0 + dt];
                    for stop in stops {
                        if stop > s && stop <= t0 + dt {
                            let g = cross_matrix(&p.bloch_drive(0.5 * (s + stop))) + r;
                            v = AffineMap::from_generator(&g, &c, stop - s).apply(&v);
                            s = stop;
                        }
                    }
                }
                Envelope::Cosine => {
                    let steps = (RK4_STEPS_PER_WINDOW / samples_per_pulse).max(4);
                    v = rk4_propagator_unclamped(p, np, t0, dt, steps).apply(&v);
                }
            }
            out.push((t_base + t0 + dt, BlochState::new(v)));
        }
        t_base += p.gate_duration;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{Axis, PulseSpec};
    use std::f64::consts::PI;

    #[test]
    fn free_decay_from_excited() {
        // v_z(t) = eta - (eta + 1) e^{-gamma1 t}
        let np = NoiseParams::with_thermal(20e-6, 30e-6, crate::noise::DEFAULT_OMEGA01, 0.85)
            .unwrap();
        for t in [0.0, 5e-6, 20e-6, 80e-6] {
            let v = free_propagator(&np, t).apply(&Vector3::new(0.0, 0.0, -1.0));
            let expect = np.eta - (np.eta + 1.0) * (-np.gamma1() * t).exp();
            assert!((v.z - expect).abs() < 1e-12, "t = {t}");
            assert!(v.x.abs() < 1e-15 && v.y.abs() < 1e-15);
        }
    }

    #[test]
    fn square_pi_flips_ground_state() {
        let np = NoiseParams::noiseless();
        let pulse = PulseSpec::square_pi(Axis::X, 1).drive();
        let traj = evolve_bloch(&[pulse], &np, &BlochState::ground()).unwrap();
        let v = traj.last().unwrap().v;
        assert!((v - Vector3::new(0.0, 0.0, -1.0)).norm() < 1e-10);
    }

    #[test]
    fn cosine_and_square_pi_agree_without_noise() {
        let np = NoiseParams::noiseless();
        let sq = PulseSpec::square_pi(Axis::Y, 1).drive();
        let cosp = PulseSpec::cosine_pi(Axis::Y, 1).drive();
        for v0 in [BlochState::ground(), BlochState::plus(), BlochState::pure(0.9, 0.4)] {
            let a = evolve_bloch(&[sq], &np, &v0).unwrap().last().unwrap().v;
            let b = evolve_bloch(&[cosp], &np, &v0).unwrap().last().unwrap().v;
            assert!((a - b).norm() < 1e-8, "diff {}", (a - b).norm());
        }
    }

    #[test]
    fn negative_pulse_inverts_positive() {
        let np = NoiseParams::noiseless();
        let plus = PulseSpec::square_pi(Axis::Y, 1).drive();
        let minus = PulseSpec::square_pi(Axis::Y, -1).drive();
        let v0 = BlochState::pure(1.1, 0.3);
        let traj = evolve_bloch(&[plus, minus], &np, &v0).unwrap();
        assert!((traj.last().unwrap().v - v0.v).norm() < 1e-10);
    }

    #[test]
    fn propagator_cache_hits() {
        let np = NoiseParams::new(23.36e-6, 44.13e-6).unwrap();
        let p = PulseSpec::square_pi(Axis::X, 1).drive();
        let mut cache = PropagatorCache::new();
        let a = cache.get_or_compile(&p, &np).unwrap();
        let b = cache.get_or_compile(&p, &np).unwrap();
        assert_eq!(cache.len(), 1);
        assert_eq!(a, b);
    }

    #[test]
    fn detuned_pulse_rotation_angle() {
        // a square pulse with detuning rotates by sqrt((pi+dtheta)^2 + (delta t)^2)
        let np = NoiseParams::noiseless();
        let dphi = 0.02f64;
        let spec = PulseSpec::square_pi(Axis::X, 1).with_angle_errors(0.01, dphi);
        let p = spec.drive();
        let map = pulse_propagator(&p, &np).unwrap();
        // rotation angle from the trace of the SO(3) matrix
        let tr = map.m.trace();
        let angle = ((tr - 1.0) / 2.0).clamp(-1.0, 1.0).acos();
        let theta_err = ((PI + 0.01).powi(2) + (PI * dphi).powi(2)).sqrt();
        let expect = (2.0 * PI - theta_err).min(theta_err); // angle folded into [0, pi]
        assert!((angle - expect).abs() < 1e-9, "{angle} vs {expect}");
    }
}
