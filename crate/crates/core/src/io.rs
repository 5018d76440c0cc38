//! File-format boundary: JSON schemas with experiment-friendly units
//! (durations in ns, frequencies in MHz, angles in degrees — converted to
//! SI and radians internally), result documents with config echoes, and
//! CSV curve emission at full precision.

use serde::{Deserialize, Serialize};

use crate::noise::NoiseParams;
use crate::pulse::{Axis, Envelope, PulseSpec};
use crate::{Error, Result};

pub const NS: f64 = 1e-9;
pub const MHZ: f64 = 2.0 * std::f64::consts::PI * 1e6;

/// Pulse description in boundary units.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseJson {
    pub axis: Axis,
    #[serde(default = "default_sign")]
    pub sign: i8,
    /// Nominal rotation angle in degrees.
    #[serde(default = "default_angle")]
    pub angle_deg: f64,
    /// Gate duration in ns.
    #[serde(default = "default_gate_ns")]
    pub gate_ns: f64,
    /// Active drive window in ns; defaults to the full gate window.
    #[serde(default)]
    pub window_ns: Option<f64>,
    #[serde(default = "default_envelope")]
    pub envelope: Envelope,
    /// Rotation error of the pulse in degrees.
    #[serde(default)]
    pub delta_theta_deg: f64,
    /// Phase error of the pulse in degrees.
    #[serde(default)]
    pub delta_phi_deg: f64,
}

fn default_sign() -> i8 {
    1
}
fn default_angle() -> f64 {
    180.0
}
fn default_gate_ns() -> f64 {
    88.0
}
fn default_envelope() -> Envelope {
    Envelope::Square
}

impl PulseJson {
    pub fn to_spec(&self) -> Result<PulseSpec> {
        let gate = self.gate_ns * NS;
        let window = self.window_ns.unwrap_or(self.gate_ns) * NS;
        Ok(PulseSpec::new(
            self.axis,
            self.sign,
            self.angle_deg.to_radians(),
            gate,
            window,
            self.envelope,
        )?
        .with_angle_errors(
            self.delta_theta_deg.to_radians(),
            self.delta_phi_deg.to_radians(),
        ))
    }

    pub fn from_spec(spec: &PulseSpec) -> Self {
        let (dtheta, dphi) = crate::pulse::coherent_errors(spec).unwrap_or((0.0, 0.0));
        Self {
            axis: spec.axis,
            sign: spec.sign,
            angle_deg: spec.nominal_angle.to_degrees(),
            gate_ns: spec.gate_duration / NS,
            window_ns: Some(spec.active_window / NS),
            envelope: spec.envelope,
            delta_theta_deg: dtheta.to_degrees(),
            delta_phi_deg: dphi.to_degrees(),
        }
    }
}

/// Noise description in boundary units.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseJson {
    /// Relaxation time in ns (omit for no relaxation).
    #[serde(default)]
    pub t1_ns: Option<f64>,
    /// Coherence time in ns (omit for no decoherence).
    #[serde(default)]
    pub t2_ns: Option<f64>,
    /// Qubit frequency in MHz.
    #[serde(default = "default_freq")]
    pub frequency_mhz: f64,
    /// Thermal factor in [0, 1]; 1 is zero temperature.
    #[serde(default = "default_eta")]
    pub eta: f64,
}

fn default_freq() -> f64 {
    4370.0
}
fn default_eta() -> f64 {
    1.0
}

impl NoiseJson {
    pub fn to_params(&self) -> Result<NoiseParams> {
        let t1 = self.t1_ns.map_or(f64::INFINITY, |t| t * NS);
        let t2 = self.t2_ns.map_or(f64::INFINITY, |t| t * NS);
        if t1.is_infinite() && t2.is_infinite() {
            let mut np = NoiseParams::noiseless();
            np.omega01 = self.frequency_mhz * MHZ;
            np.eta = self.eta;
            return Ok(np);
        }
        NoiseParams::with_thermal(t1, t2, self.frequency_mhz * MHZ, self.eta)
    }

    pub fn from_params(np: &NoiseParams) -> Self {
        Self {
            t1_ns: if np.t1.is_infinite() { None } else { Some(np.t1 / NS) },
            t2_ns: if np.t2.is_infinite() { None } else { Some(np.t2 / NS) },
            frequency_mhz: np.omega01 / MHZ,
            eta: np.eta,
        }
    }
}

/// One plottable curve inside a results document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Curve {
    pub label: String,
    pub x: Vec<f64>,
    pub y_mean: Vec<f64>,
    #[serde(default)]
    pub y_sem: Vec<f64>,
    /// Model prediction on the same grid, when available.
    #[serde(default)]
    pub model: Vec<f64>,
}

/// Results file: protocol id, toolkit version, seed, the configuration that
/// produced it, protocol-specific results, and the curves.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub protocol: String,
    pub toolkit_version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub results: serde_json::Value,
    pub curves: Vec<Curve>,
    /// Fit-level warnings (partial success).
    #[serde(default)]
    pub flags: Vec<String>,
}

/// Format a float with 17 significant digits, enough to round-trip f64.
pub fn fmt_full(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a curve as CSV with columns `x, y_mean, y_sem, model_prediction`.
pub fn curve_csv(curve: &Curve) -> String {
    let mut out = String::from("x,y_mean,y_sem,model_prediction\n");
    for i in 0..curve.x.len() {
        let sem = curve.y_sem.get(i).copied().unwrap_or(0.0);
        let model = curve.model.get(i).copied().unwrap_or(f64::NAN);
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_full(curve.x[i]),
            fmt_full(curve.y_mean[i]),
            fmt_full(sem),
            fmt_full(model)
        ));
    }
    out
}

/// Parse a curve CSV back (header required), for round-trip checks and the
/// standalone fit command.
pub fn parse_curve_csv(text: &str) -> Result<Curve> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidParameter("empty CSV".into()))?;
    if !header.starts_with('x') {
        return Err(Error::InvalidParameter("missing CSV header".into()));
    }
    let mut curve = Curve {
        label: String::new(),
        x: vec![],
        y_mean: vec![],
        y_sem: vec![],
        model: vec![],
    };
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "CSV line {} has {} columns",
                ln + 2,
                cells.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad number {s:?} on line {}", ln + 2)))
        };
        curve.x.push(parse(cells[0])?);
        curve.y_mean.push(parse(cells[1])?);
        if cells.len() > 2 {
            curve.y_sem.push(parse(cells[2])?);
        }
        if cells.len() > 3 {
            if let Ok(v) = parse(cells[3]) {
                curve.model.push(v);
            }
        }
    }
    Ok(curve)
}

fn complex_matrix_to_json(m: &crate::CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn complex_matrix_from_json(rows: &[Vec<[f64; 2]>]) -> Result<crate::CMat> {
    let nr = rows.len();
    if nr == 0 || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(Error::InvalidParameter("ragged complex matrix".into()));
    }
    let nc = rows[0].len();
    Ok(crate::CMat::from_fn(nr, nc, |i, j| {
        crate::linalg::c(rows[i][j][0], rows[i][j][1])
    }))
}

/// Channel serialization: a representation tag plus row-major complex
/// matrices as `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "representation", rename_all = "snake_case")]
pub enum ChannelDocument {
    Kraus { dim: usize, operators: Vec<Vec<Vec<[f64; 2]>>> },
    Chi { dim: usize, basis: Vec<String>, entries: Vec<Vec<[f64; 2]>> },
    Superop { dim: usize, entries: Vec<Vec<[f64; 2]>> },
    Choi { dim: usize, entries: Vec<Vec<[f64; 2]>> },
}

pub fn channel_to_json(ch: &crate::QuantumChannel) -> Result<ChannelDocument> {
    Ok(match ch.representation() {
        crate::Representation::Kraus(ops) => ChannelDocument::Kraus {
            dim: ch.dim,
            operators: ops.iter().map(complex_matrix_to_json).collect(),
        },
        crate::Representation::Chi(chi) => ChannelDocument::Chi {
            dim: ch.dim,
            basis: chi.basis.iter().map(|p| p.label()).collect(),
            entries: complex_matrix_to_json(&chi.mat),
        },
        crate::Representation::Superop(s) => ChannelDocument::Superop {
            dim: ch.dim,
            entries: complex_matrix_to_json(s),
        },
        crate::Representation::Choi(m) => ChannelDocument::Choi {
            dim: ch.dim,
            entries: complex_matrix_to_json(m),
        },
    })
}

pub fn channel_from_json(doc: &ChannelDocument) -> Result<crate::QuantumChannel> {
    match doc {
        ChannelDocument::Kraus { dim, operators } => {
            let ops = operators
                .iter()
                .map(|o| complex_matrix_from_json(o))
                .collect::<Result<Vec<_>>>()?;
            crate::QuantumChannel::new(*dim, crate::Representation::Kraus(ops))
        }
        ChannelDocument::Chi { dim, entries, .. } => {
            let chi = crate::ProcessMatrix::new(*dim, complex_matrix_from_json(entries)?)?;
            crate::QuantumChannel::new(*dim, crate::Representation::Chi(chi))
        }
        ChannelDocument::Superop { dim, entries } => crate::QuantumChannel::new(
            *dim,
            crate::Representation::Superop(complex_matrix_from_json(entries)?),
        ),
        ChannelDocument::Choi { dim, entries } => crate::QuantumChannel::new(
            *dim,
            crate::Representation::Choi(complex_matrix_from_json(entries)?),
        ),
    }
}

/// Process matrix as a JSON value (basis labels + row-major `[re, im]`
/// entries).
pub fn chi_to_json(chi: &crate::ProcessMatrix) -> serde_json::Value {
    serde_json::json!({
        "dim": chi.dim,
        "basis": chi.basis.iter().map(|p| p.label()).collect::<Vec<_>>(),
        "entries": complex_matrix_to_json(&chi.mat),
    })
}

/// Trajectory CSV with columns `t_ns, vx, vy, vz`.
pub fn trajectory_csv(points: &[(f64, crate::state::BlochState)]) -> String {
    let mut out = String::from("t_ns,vx,vy,vz\n");
    for (t, b) in points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_full(t / NS),
            fmt_full(b.v.x),
            fmt_full(b.v.y),
            fmt_full(b.v.z)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pulse_units_roundtrip() {
        let json = PulseJson {
            axis: Axis::Y,
            sign: -1,
            angle_deg: 180.0,
            gate_ns: 88.0,
            window_ns: Some(80.0),
            envelope: Envelope::Cosine,
            delta_theta_deg: 0.398,
            delta_phi_deg: 0.426,
        };
        let spec = json.to_spec().unwrap();
        assert!((spec.gate_duration - 88e-9).abs() < 1e-20);
        assert!((spec.active_window - 80e-9).abs() < 1e-20);
        let back = PulseJson::from_spec(&spec);
        assert!((back.delta_theta_deg - 0.398).abs() < 1e-12);
        assert!((back.delta_phi_deg - 0.426).abs() < 1e-12);
    }

    #[test]
    fn noise_units_roundtrip() {
        let json = NoiseJson {
            t1_ns: Some(23_360.0),
            t2_ns: Some(44_130.0),
            frequency_mhz: 4370.0,
            eta: 0.8,
        };
        let np = json.to_params().unwrap();
        assert!((np.t1 - 23.36e-6).abs() < 1e-18);
        assert!((np.omega01 - 2.0 * std::f64::consts::PI * 4.37e9).abs() < 1.0);
        let back = NoiseJson::from_params(&np);
        assert!((back.t1_ns.unwrap() - 23_360.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = r#"{"axis": "x", "bogus": 1}"#;
        assert!(serde_json::from_str::<PulseJson>(bad).is_err());
    }

    #[test]
    fn channel_json_roundtrip_preserves_action() {
        let u = crate::protocols::clifford::rotation_unitary(0.4, 0.9);
        let dep = crate::depolarizing_channel(0.1, 1).unwrap();
        let ch = crate::QuantumChannel::from_unitary(&u)
            .unwrap()
            .then(&dep)
            .unwrap();
        for tag in ["kraus", "chi", "superop", "choi"] {
            let converted = ch.convert_to(tag).unwrap();
            let doc = channel_to_json(&converted).unwrap();
            let text = serde_json::to_string(&doc).unwrap();
            let back: ChannelDocument = serde_json::from_str(&text).unwrap();
            let restored = channel_from_json(&back).unwrap();
            let rho = crate::BlochState::pure(1.0, 0.4).density();
            let a = ch.apply(&rho).unwrap();
            let b = restored.apply(&rho).unwrap();
            assert!(
                crate::linalg::max_abs_diff(a.matrix(), b.matrix()) < 1e-12,
                "{tag}"
            );
        }
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let curve = Curve {
            label: "test".into(),
            x: vec![1.0, 2.0, 3.000000000000004],
            y_mean: vec![0.1234567890123456, 0.5, 1.0 / 3.0],
            y_sem: vec![0.01, 0.02, 0.03],
            model: vec![0.12, 0.49, 0.34],
        };
        let text = curve_csv(&curve);
        let back = parse_curve_csv(&text).unwrap();
        assert_eq!(curve.x, back.x);
        assert_eq!(curve.y_mean, back.y_mean);
        assert_eq!(curve.y_sem, back.y_sem);
        assert_eq!(curve.model, back.model);
    }
}
