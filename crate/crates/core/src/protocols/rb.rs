//! Randomized benchmarking and its interleaved variant on one qubit.
//!
//! Sequences of uniformly random Cliffords are closed by the group inverse
//! and the ground-state survival probability is fit to `A p^m + B`; the
//! average Clifford infidelity is `r_C = (D-1)(1-p)/D`. Simulation runs on
//! Bloch-vector affine maps supplied per Clifford by an oracle, either
//! compiled from physical pulses with a noise model or injected directly as
//! channels.

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::bloch::{pulse_propagator, AffineMap};
use crate::fitting::{fit_multi_start, FitModel, ModelKind};
use crate::noise::NoiseParams;
use crate::pulse::{DrivePulse, PulseSpec};
use crate::rng;
use crate::{Error, Result};

use super::clifford::CliffordGroup1Q;

/// Supplies the noisy Bloch map implementing each Clifford.
pub trait CliffordOracle: Sync {
    fn apply_map(&self, clifford: usize) -> AffineMap;
}

/// Pulse-level oracle: every Clifford is compiled to its physical pulses
/// with shared coherent-error injection and Markovian noise; the identity
/// idles for one gate duration.
#[derive(Debug, Clone)]
pub struct PulseOracle {
    maps: Vec<AffineMap>,
}

impl PulseOracle {
    /// `delta_theta`/`delta_phi` are the coherent errors of a pi pulse;
    /// pi/2 pulses get half the rotation error and a quarter of the phase
    /// error.
    pub fn new(
        group: &CliffordGroup1Q,
        template: &PulseSpec,
        np: &NoiseParams,
        delta_theta_pi: f64,
        delta_phi_pi: f64,
    ) -> Result<Self> {
        let t_g = template.gate_duration;
        let tau = template.active_window;
        let envelope = template.envelope;
        let build = |prim: super::clifford::Primitive| -> Result<AffineMap> {
            let (phase, sign, angle) = prim.pulse_params();
            let (dtheta, dphi) = if prim.is_pi_pulse() {
                (delta_theta_pi, delta_phi_pi)
            } else {
                (delta_theta_pi / 2.0, delta_phi_pi / 4.0)
            };
            let pulse = DrivePulse {
                phase,
                sign,
                nominal_angle: angle,
                gate_duration: t_g,
                active_window: tau,
                envelope,
                amplitude_error: dtheta / t_g,
                detuning_error: dphi * angle / t_g,
            };
            pulse_propagator(&pulse, np)
        };
        let mut prim_maps = std::collections::HashMap::new();
        for prim in super::clifford::Primitive::ALL {
            prim_maps.insert(prim, build(prim)?);
        }
        let idle = pulse_propagator(&DrivePulse::free(t_g), np)?;
        let mut maps = Vec::with_capacity(24);
        for word in &group.decompositions {
            let mut m = AffineMap::identity();
            if word.is_empty() {
                m = idle;
            }
            for prim in word {
                m = m.then(&prim_maps[prim]);
            }
            maps.push(m);
        }
        Ok(Self { maps })
    }
}

impl CliffordOracle for PulseOracle {
    fn apply_map(&self, clifford: usize) -> AffineMap {
        self.maps[clifford]
    }
}

/// Gate-independent noise: the ideal Clifford rotation followed by a fixed
/// channel (as a Bloch affine map).
#[derive(Debug, Clone)]
pub struct ChannelOracle {
    maps: Vec<AffineMap>,
}

impl ChannelOracle {
    pub fn gate_independent(group: &CliffordGroup1Q, channel: AffineMap) -> Self {
        let maps = group
            .rotations
            .iter()
            .map(|o| AffineMap { m: *o, b: Vector3::zeros() }.then(&channel))
            .collect();
        Self { maps }
    }

    /// Gate-dependent noise: one channel per Clifford index.
    pub fn gate_dependent(group: &CliffordGroup1Q, channels: Vec<AffineMap>) -> Self {
        let maps = group
            .rotations
            .iter()
            .zip(channels)
            .map(|(o, ch)| AffineMap { m: *o, b: Vector3::zeros() }.then(&ch))
            .collect();
        Self { maps }
    }
}

impl CliffordOracle for ChannelOracle {
    fn apply_map(&self, clifford: usize) -> AffineMap {
        self.maps[clifford]
    }
}

/// Depolarizing channel with survival weight `p` as a Bloch map.
pub fn depolarizing_map(p: f64) -> AffineMap {
    AffineMap {
        m: nalgebra::Matrix3::identity() * p,
        b: Vector3::zeros(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RbResult {
    pub depths: Vec<usize>,
    pub survival_mean: Vec<f64>,
    pub survival_sem: Vec<f64>,
    pub amplitude: f64,
    pub offset: f64,
    pub decay: f64,
    pub decay_sigma: f64,
    pub r_c: f64,
    pub r_c_sigma: f64,
    pub sequences: usize,
    pub shots: u64,
    pub seed: u64,
    /// Set when the data was flat and the exponential fit degenerate
    /// (noiseless limit p -> 1).
    pub degenerate: bool,
}

/// Default depth grid: powers of two up to 512 plus the 700-Clifford
/// endpoint.
pub fn default_depths() -> Vec<usize> {
    vec![2, 4, 8, 16, 32, 64, 128, 256, 512, 700]
}

fn survival_of_sequence<O: CliffordOracle>(
    group: &CliffordGroup1Q,
    oracle: &O,
    word: &[usize],
) -> f64 {
    let mut v = Vector3::new(0.0, 0.0, 1.0);
    for &g in word {
        v = oracle.apply_map(g).apply(&v);
    }
    let inv = group.inverse_of_word(word);
    v = oracle.apply_map(inv).apply(&v);
    (0.5 * (1.0 + v.z)).clamp(0.0, 1.0)
}

/// Run standard randomized benchmarking. `shots = 0` computes exact
/// expectation values (no sampling noise).
pub fn rb_run<O: CliffordOracle>(
    group: &CliffordGroup1Q,
    oracle: &O,
    depths: &[usize],
    k_sequences: usize,
    shots: u64,
    seed: u64,
) -> Result<RbResult> {
    rb_run_interleaved(group, oracle, None, depths, k_sequences, shots, seed)
}

fn rb_run_interleaved<O: CliffordOracle>(
    group: &CliffordGroup1Q,
    oracle: &O,
    interleaved: Option<usize>,
    depths: &[usize],
    k_sequences: usize,
    shots: u64,
    seed: u64,
) -> Result<RbResult> {
    if depths.is_empty() {
        return Err(Error::InvalidParameter("empty depth grid".into()));
    }
    if k_sequences < 2 {
        return Err(Error::InvalidParameter("need at least 2 sequences".into()));
    }
    let stats: Vec<(f64, f64)> = depths
        .par_iter()
        .enumerate()
        .map(|(di, &m)| {
            let mut samples = Vec::with_capacity(k_sequences);
            for k in 0..k_sequences {
                let mut r = rng::derive2(seed, di as u64, k as u64);
                use rand::Rng as _;
                let mut word = Vec::with_capacity(2 * m);
                for i in 0..m {
                    word.push(r.gen_range(0..24usize));
                    if let Some(g) = interleaved {
                        // interleave between consecutive random Cliffords
                        if i + 1 < m {
                            word.push(g);
                        }
                    }
                }
                let mut p = survival_of_sequence(group, oracle, &word);
                if shots > 0 {
                    p = rng::binomial_fraction(&mut r, shots, p);
                }
                samples.push(p);
            }
            let mean = samples.iter().sum::<f64>() / samples.len() as f64;
            let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>()
                / (samples.len() as f64 - 1.0).max(1.0);
            (mean, (var / samples.len() as f64).sqrt())
        })
        .collect();

    let survival_mean: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let survival_sem: Vec<f64> = stats.iter().map(|s| s.1).collect();
    let x: Vec<f64> = depths.iter().map(|&m| m as f64).collect();

    // degenerate flat data (noiseless): p -> 1, r_C = 0
    let spread = survival_mean
        .iter()
        .map(|&p| (p - survival_mean[0]).abs())
        .fold(0.0, f64::max);
    if spread < 1e-9 && shots == 0 {
        return Ok(RbResult {
            depths: depths.to_vec(),
            survival_mean: survival_mean.clone(),
            survival_sem,
            amplitude: survival_mean[0] - 0.5,
            offset: 0.5,
            decay: 1.0,
            decay_sigma: 0.0,
            r_c: 0.0,
            r_c_sigma: 0.0,
            sequences: k_sequences,
            shots,
            seed,
            degenerate: true,
        });
    }

    let weights: Option<Vec<f64>> = if shots > 0 {
        Some(
            survival_mean
                .iter()
                .map(|&p| {
                    let var = (p.clamp(1e-3, 1.0 - 1e-3) * (1.0 - p.clamp(1e-3, 1.0 - 1e-3)))
                        / (shots as f64 * k_sequences as f64);
                    1.0 / var
                })
                .collect(),
        )
    } else {
        None
    };

    // initialization: offset 1/2, decay from a log-linear estimate
    let mut p0 = 0.99f64;
    let deviations: Vec<(f64, f64)> = x
        .iter()
        .zip(&survival_mean)
        .filter(|(_, &pm)| pm - 0.5 > 1e-3)
        .map(|(&m, &pm)| (m, (pm - 0.5).ln()))
        .collect();
    if deviations.len() >= 2 {
        let n = deviations.len() as f64;
        let sx: f64 = deviations.iter().map(|d| d.0).sum();
        let sy: f64 = deviations.iter().map(|d| d.1).sum();
        let sxx: f64 = deviations.iter().map(|d| d.0 * d.0).sum();
        let sxy: f64 = deviations.iter().map(|d| d.0 * d.1).sum();
        let denom = n * sxx - sx * sx;
        if denom > 0.0 {
            let slope = (n * sxy - sx * sy) / denom;
            p0 = slope.exp().clamp(0.5, 1.0 - 1e-12);
        }
    }
    let model = FitModel::new(ModelKind::RbExp);
    let starts = vec![
        vec![0.5, p0, 0.5],
        vec![survival_mean[0] - 0.5, p0, 0.5],
        vec![0.5, (p0 + 1.0) / 2.0, 0.5],
    ];
    let fit = fit_multi_start(&model, &x, &survival_mean, weights.as_deref(), &starts)?;
    if !fit.converged() {
        return Err(Error::FitFailure(format!(
            "exponential fit status {:?}; survival curve: {:?}",
            fit.status, survival_mean
        )));
    }
    let p = fit.parameters[1];
    let r_c = 0.5 * (1.0 - p);
    Ok(RbResult {
        depths: depths.to_vec(),
        survival_mean,
        survival_sem,
        amplitude: fit.parameters[0],
        offset: fit.parameters[2],
        decay: p,
        decay_sigma: fit.uncertainties[1],
        r_c,
        r_c_sigma: 0.5 * fit.uncertainties[1],
        sequences: k_sequences,
        shots,
        seed,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IrbResult {
    pub baseline: RbResult,
    pub interleaved: RbResult,
    /// Estimated infidelity contribution of the interleaved gate.
    pub r_gate: f64,
    /// Half-width of the systematic-error interval from imperfect random
    /// gates.
    pub error_bound: f64,
    /// Set when the estimate is unphysical (negative rate or interval
    /// escaping [0, 1]); reported, never thrown.
    pub unphysical: bool,
}

/// Interleaved randomized benchmarking of gate `gate_index`, reusing a
/// baseline result.
#[allow(clippy::too_many_arguments)]
pub fn irb_run<O: CliffordOracle>(
    group: &CliffordGroup1Q,
    oracle: &O,
    gate_index: usize,
    baseline: &RbResult,
    depths: &[usize],
    k_sequences: usize,
    shots: u64,
    seed: u64,
) -> Result<IrbResult> {
    let inter = rb_run_interleaved(
        group,
        oracle,
        Some(gate_index),
        depths,
        k_sequences,
        shots,
        seed,
    )?;
    let d = 2.0f64;
    let p = baseline.decay;
    let pi = inter.decay;
    let r_gate = (d - 1.0) / d * (1.0 - pi / p);
    let e1 = (d - 1.0) * ((p - pi / p).abs() + (1.0 - p)) / d;
    let e2 = 2.0 * (d * d - 1.0) * (1.0 - p) / (p * d * d)
        + 4.0 * (1.0 - p).sqrt() * (d * d - 1.0).sqrt() / p;
    let error_bound = e1.min(e2);
    let unphysical = r_gate < 0.0 || r_gate + error_bound > 1.0;
    Ok(IrbResult {
        baseline: baseline.clone(),
        interleaved: inter,
        r_gate,
        error_bound,
        unphysical,
    })
}

/// First-order depth model
/// `A1 p^m + B1 + C1 (m-1)(q - p^2) p^{m-2}`, exposed as an alternative fit
/// for gate-dependent noise.
pub fn rb_first_order_model(m: f64, a1: f64, b1: f64, c1: f64, p: f64, q: f64) -> f64 {
    ModelKind::RbFirstOrder.value(m, &[a1, b1, c1, p, q])
}
