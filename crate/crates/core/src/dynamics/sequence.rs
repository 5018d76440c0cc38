//! Stroboscopic pulse-pair sequences and the experiment records they
//! produce.
//!
//! A sequence prepares a state, applies `n` repetitions of a fixed pulse
//! unit (a pair like XX or YYbar, free evolution, or the six-pulse UR6
//! composite), unprepares, and measures the ground-state population. The
//! fidelity is recorded stroboscopically at `t_n = n * unit_duration`.

use serde::{Deserialize, Serialize};

use crate::dynamics::bloch::PropagatorCache;
use crate::noise::NoiseParams;
use crate::pulse::{DrivePulse, PulseSpec};
use crate::rng;
use crate::state::BlochState;
use crate::{Error, Result};

use std::f64::consts::{FRAC_PI_2, PI};

/// UR6 relative phases: second differences equal 2*pi/3, the universally
/// robust choice for six pi pulses.
pub const UR6_PHASES: [f64; 6] = [
    0.0,
    2.0 * PI / 3.0,
    0.0,
    0.0,
    2.0 * PI / 3.0,
    0.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    /// Two identical pi pulses about +x.
    Xx,
    /// +x then -x.
    XxBar,
    /// Two identical pi pulses about +y.
    Yy,
    /// +y then -y.
    YyBar,
    /// -y then +y.
    YBarY,
    /// No pulses; idle for one pair duration.
    Free,
    /// Six pi pulses with the UR6 phase pattern.
    Ur6,
}

impl PairKind {
    pub fn pulses_per_unit(self) -> usize {
        match self {
            PairKind::Ur6 => 6,
            PairKind::Free => 0,
            _ => 2,
        }
    }

    /// Pulse train of one repetition unit, built from the template pi pulse
    /// (whose coherent errors are carried into every pulse). Negative
    /// rotations negate the drive and the amplitude error but keep the
    /// detuning.
    pub fn unit(self, template: &PulseSpec) -> Vec<DrivePulse> {
        let base = template.drive();
        let flip = |p: DrivePulse| DrivePulse { sign: -p.sign, ..p };
        match self {
            PairKind::Xx => vec![base.with_phase(0.0), base.with_phase(0.0)],
            PairKind::XxBar => vec![base.with_phase(0.0), flip(base.with_phase(0.0))],
            PairKind::Yy => vec![base.with_phase(FRAC_PI_2), base.with_phase(FRAC_PI_2)],
            PairKind::YyBar => vec![base.with_phase(FRAC_PI_2), flip(base.with_phase(FRAC_PI_2))],
            PairKind::YBarY => vec![flip(base.with_phase(FRAC_PI_2)), base.with_phase(FRAC_PI_2)],
            PairKind::Free => vec![DrivePulse::free(2.0 * template.gate_duration)],
            PairKind::Ur6 => UR6_PHASES.iter().map(|&ph| base.with_phase(ph)).collect(),
        }
    }

    /// Duration of one repetition unit.
    pub fn unit_duration(self, template: &PulseSpec) -> f64 {
        match self {
            PairKind::Ur6 => 6.0 * template.gate_duration,
            _ => 2.0 * template.gate_duration,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PairKind::Xx => "XX",
            PairKind::XxBar => "XXbar",
            PairKind::Yy => "YY",
            PairKind::YyBar => "YYbar",
            PairKind::YBarY => "YbarY",
            PairKind::Free => "free",
            PairKind::Ur6 => "UR6",
        }
    }
}

/// Initial-state preparation label. Preparation and unpreparation are ideal;
/// the sequences themselves carry the modeled noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preparation {
    Ground,
    Excited,
    Plus,
    /// `|psi_{theta,phi}> = cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`,
    /// angles in radians.
    Pure { theta: f64, phi: f64 },
}

impl Preparation {
    pub fn bloch(self) -> BlochState {
        match self {
            Preparation::Ground => BlochState::ground(),
            Preparation::Excited => BlochState::excited(),
            Preparation::Plus => BlochState::plus(),
            Preparation::Pure { theta, phi } => BlochState::pure(theta, phi),
        }
    }

    pub fn label(self) -> String {
        match self {
            Preparation::Ground => "0".into(),
            Preparation::Excited => "1".into(),
            Preparation::Plus => "+".into(),
            Preparation::Pure { theta, phi } => format!("psi({theta:.4},{phi:.4})"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub preparation: Preparation,
    pub pair: PairKind,
    /// Repetition counts, strictly increasing.
    pub repetitions: Vec<usize>,
}

impl SequenceSpec {
    pub fn new(preparation: Preparation, pair: PairKind, repetitions: Vec<usize>) -> Result<Self> {
        if repetitions.is_empty() {
            return Err(Error::InvalidParameter("empty repetition grid".into()));
        }
        if repetitions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "repetitions must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            preparation,
            pair,
            repetitions,
        })
    }
}

/// One sequence sweep: times, fidelities, shot metadata and the seed that
/// reproduces it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub sequence: SequenceSpec,
    /// Stroboscopic times `t_n` in seconds.
    pub times: Vec<f64>,
    pub fidelities: Vec<f64>,
    /// Shots per point; 0 means exact expectation values.
    pub shots: u64,
    pub seed: u64,
    /// True when fidelities are exact expectations (no shot sampling).
    pub exact: bool,
}

impl ExperimentRecord {
    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.fidelities.len() {
            return Err(Error::InvalidParameter(
                "times and fidelities length mismatch".into(),
            ));
        }
        if self.fidelities.iter().any(|&f| !(0.0..=1.0).contains(&f)) {
            return Err(Error::InvalidParameter("fidelity outside [0,1]".into()));
        }
        Ok(())
    }
}

/// Run a sequence sweep: for each listed repetition count, prepare, apply
/// the unit that many times, unprepare, and record the ground-state
/// probability (survival fidelity against the prepared state). With
/// `shots > 0` each point is replaced by a seeded binomial sample.
pub fn run_sequence(
    seq: &SequenceSpec,
    template: &PulseSpec,
    np: &NoiseParams,
    shots: u64,
    seed: u64,
) -> Result<ExperimentRecord> {
    let unit = seq.pair.unit(template);
    let unit_duration = seq.pair.unit_duration(template);
    let mut cache = PropagatorCache::new();
    let mut unit_map = crate::dynamics::bloch::AffineMap::identity();
    for p in &unit {
        unit_map = unit_map.then(&cache.get_or_compile(p, np)?);
    }

    let v0 = seq.preparation.bloch();
    let max_n = *seq.repetitions.last().unwrap();
    let mut fidelities = Vec::with_capacity(seq.repetitions.len());
    let mut times = Vec::with_capacity(seq.repetitions.len());
    let mut v = v0.v;
    let mut idx = 0;
    for n in 1..=max_n {
        v = unit_map.apply(&v);
        if seq.repetitions[idx] == n {
            let f = 0.5 * (1.0 + v0.v.dot(&v));
            fidelities.push(f.clamp(0.0, 1.0));
            times.push(n as f64 * unit_duration);
            idx += 1;
            if idx == seq.repetitions.len() {
                break;
            }
        }
    }

    let exact = shots == 0;
    if !exact {
        for (k, f) in fidelities.iter_mut().enumerate() {
            let mut r = rng::derive(seed, k as u64);
            *f = rng::binomial_fraction(&mut r, shots, *f);
        }
    }

    let rec = ExperimentRecord {
        sequence: seq.clone(),
        times,
        fidelities,
        shots,
        seed,
        exact,
    };
    rec.validate()?;
    Ok(rec)
}
