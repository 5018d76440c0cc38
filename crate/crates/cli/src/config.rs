//! Run configuration schema: one JSON document per protocol run, with
//! boundary units (ns, MHz, degrees), a mandatory seed, and strict
//! unknown-key rejection.

use serde::{Deserialize, Serialize};

use qubench_core::io::{NoiseJson, PulseJson};
use qubench_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolId {
    Db,
    Rb,
    Irb,
    Dfe,
    Pfe,
    Xeb,
    Rcs,
    Sqpt,
    Aapt,
    Dcqd,
    Gst,
    Simulate,
    Fit,
}

impl ProtocolId {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolId::Db => "db",
            ProtocolId::Rb => "rb",
            ProtocolId::Irb => "irb",
            ProtocolId::Dfe => "dfe",
            ProtocolId::Pfe => "pfe",
            ProtocolId::Xeb => "xeb",
            ProtocolId::Rcs => "rcs",
            ProtocolId::Sqpt => "sqpt",
            ProtocolId::Aapt => "aapt",
            ProtocolId::Dcqd => "dcqd",
            ProtocolId::Gst => "gst",
            ProtocolId::Simulate => "simulate",
            ProtocolId::Fit => "fit",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub protocol: ProtocolId,
    pub seed: u64,
    #[serde(default)]
    pub shots: Option<u64>,
    #[serde(default)]
    pub pulse: Option<PulseJson>,
    #[serde(default)]
    pub noise: Option<NoiseJson>,
    #[serde(default)]
    pub leakage: Option<LeakageJson>,
    #[serde(default)]
    pub db: Option<DbBlock>,
    #[serde(default)]
    pub rb: Option<RbBlock>,
    #[serde(default)]
    pub irb: Option<IrbBlock>,
    #[serde(default)]
    pub dfe: Option<DfeBlock>,
    #[serde(default)]
    pub pfe: Option<PfeBlock>,
    #[serde(default)]
    pub xeb: Option<XebBlock>,
    #[serde(default)]
    pub tomo: Option<TomoBlock>,
    #[serde(default)]
    pub gst: Option<GstBlock>,
    #[serde(default)]
    pub simulate: Option<SimulateBlock>,
    #[serde(default)]
    pub fit: Option<FitBlock>,
}

impl RunConfig {
    pub fn pulse_spec(&self) -> Result<qubench_core::PulseSpec> {
        self.pulse
            .as_ref()
            .map(|p| p.to_spec())
            .unwrap_or_else(|| {
                PulseJson {
                    axis: qubench_core::Axis::X,
                    sign: 1,
                    angle_deg: 180.0,
                    gate_ns: 88.0,
                    window_ns: None,
                    envelope: qubench_core::Envelope::Square,
                    delta_theta_deg: 0.0,
                    delta_phi_deg: 0.0,
                }
                .to_spec()
            })
    }

    pub fn noise_params(&self) -> Result<qubench_core::NoiseParams> {
        match &self.noise {
            Some(n) => n.to_params(),
            None => Ok(qubench_core::NoiseParams::noiseless()),
        }
    }

    pub fn require<T: Clone>(block: &Option<T>, name: &str) -> Result<T> {
        block
            .clone()
            .ok_or_else(|| Error::InvalidParameter(format!("missing `{name}` block")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeakageJson {
    /// Anharmonicity in MHz (may be negative).
    pub anharmonicity_mhz: f64,
    #[serde(default = "default_ratio")]
    pub matrix_element_ratio: f64,
}

fn default_ratio() -> f64 {
    std::f64::consts::SQRT_2
}

impl LeakageJson {
    pub fn to_params(&self) -> Result<qubench_core::LeakageParams> {
        qubench_core::LeakageParams::new(
            self.anharmonicity_mhz * qubench_core::io::MHZ,
            self.matrix_element_ratio,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DbBlock {
    #[serde(default = "default_reps")]
    pub max_repetitions: usize,
    #[serde(default)]
    pub include_ur6: bool,
    /// Extract temperature from the saturation of this test sequence.
    #[serde(default)]
    pub temperature_from: Option<String>,
    /// Fit four imported experiment-record files (free, XX, YY, XXbar)
    /// instead of simulating.
    #[serde(default)]
    pub import_records: Option<Vec<String>>,
}

fn default_reps() -> usize {
    300
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RbBlock {
    #[serde(default)]
    pub depths: Option<Vec<usize>>,
    #[serde(default = "default_sequences")]
    pub sequences: usize,
}

fn default_sequences() -> usize {
    30
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IrbBlock {
    /// Clifford index of the interleaved gate (0 is the identity).
    pub gate_index: usize,
    #[serde(default)]
    pub depths: Option<Vec<usize>>,
    #[serde(default = "default_sequences")]
    pub sequences: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DfeTarget {
    /// n-qubit GHZ/Bell-type stabilizer state.
    Ghz { qubits: usize },
    /// Computational ground state.
    Zero { qubits: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DfeBlock {
    pub target: DfeTarget,
    /// Depolarizing weight mixing the prepared state toward fully mixed.
    #[serde(default)]
    pub noise_lambda: f64,
    pub samples: usize,
    #[serde(default = "default_n2")]
    pub shots_per_index: u64,
    #[serde(default = "default_eps")]
    pub epsilon1: f64,
    #[serde(default = "default_eps")]
    pub epsilon2: f64,
}

fn default_n2() -> u64 {
    2000
}
fn default_eps() -> f64 {
    0.01
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PfeBlock {
    pub qubits: usize,
    /// Alternating Hadamard/CZ layer count of the target circuit.
    #[serde(default = "default_layers")]
    pub layers: usize,
    /// Global depolarizing weight of the noisy implementation.
    #[serde(default)]
    pub noise_lambda: f64,
    pub samples: usize,
}

fn default_layers() -> usize {
    3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XebBlock {
    pub qubits: usize,
    /// Depth grid; a single entry runs fixed-depth estimation.
    pub depths: Vec<usize>,
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Total per-layer Pauli error rate.
    #[serde(default)]
    pub noise_rate: f64,
}

fn default_instances() -> usize {
    10
}
fn default_samples() -> usize {
    2000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelJson {
    Depolarizing { p: f64 },
    AmplitudeDamping { gamma: f64 },
    Rotation { axis: qubench_core::Axis, angle_deg: f64 },
    PhaseDamping { gamma: f64 },
}

impl ChannelJson {
    pub fn build(&self) -> Result<qubench_core::QuantumChannel> {
        use qubench_core::linalg::cr;
        use qubench_core::CMat;
        match self {
            ChannelJson::Depolarizing { p } => qubench_core::depolarizing_channel(*p, 1),
            ChannelJson::AmplitudeDamping { gamma } => {
                let a0 = CMat::from_row_slice(
                    2,
                    2,
                    &[cr(1.0), cr(0.0), cr(0.0), cr((1.0 - gamma).sqrt())],
                );
                let a1 =
                    CMat::from_row_slice(2, 2, &[cr(0.0), cr(gamma.sqrt()), cr(0.0), cr(0.0)]);
                qubench_core::QuantumChannel::from_kraus(2, vec![a0, a1])
            }
            ChannelJson::Rotation { axis, angle_deg } => {
                let u = qubench_core::protocols::clifford::rotation_unitary(
                    axis.phase(),
                    angle_deg.to_radians(),
                );
                qubench_core::QuantumChannel::from_unitary(&u)
            }
            ChannelJson::PhaseDamping { gamma } => {
                let a0 = CMat::from_row_slice(
                    2,
                    2,
                    &[cr(1.0), cr(0.0), cr(0.0), cr((1.0 - gamma).sqrt())],
                );
                let a1 = CMat::from_row_slice(2, 2, &[cr(0.0), cr(0.0), cr(0.0), cr(gamma.sqrt())]);
                qubench_core::QuantumChannel::from_kraus(2, vec![a0, a1])
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomoBlock {
    /// Channel under tomography, composed left to right.
    pub channel: Vec<ChannelJson>,
}

impl TomoBlock {
    pub fn build_channel(&self) -> Result<qubench_core::QuantumChannel> {
        if self.channel.is_empty() {
            return Ok(qubench_core::QuantumChannel::identity(2));
        }
        let mut ch = self.channel[0].build()?;
        for part in &self.channel[1..] {
            ch = ch.then(&part.build()?)?;
        }
        Ok(ch)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GstBlock {
    #[serde(default = "default_gst_shots")]
    pub shots: u64,
    /// Germ repetition powers for the long-sequence design.
    #[serde(default = "default_powers")]
    pub germ_powers: Vec<usize>,
    /// Over-rotation injected on the sqrtX gate of the truth model.
    #[serde(default)]
    pub over_rotation_deg: f64,
    /// Depolarizing strength injected on every truth gate.
    #[serde(default)]
    pub depolarizing_p: f64,
    #[serde(default = "default_starts")]
    pub extra_starts: usize,
    #[serde(default = "default_gst_iters")]
    pub max_iterations: usize,
}

fn default_gst_shots() -> u64 {
    2000
}
fn default_powers() -> Vec<usize> {
    vec![1]
}
fn default_starts() -> usize {
    4
}
fn default_gst_iters() -> usize {
    120
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateBlock {
    pub preparation: qubench_core::dynamics::Preparation,
    pub pair: qubench_core::dynamics::PairKind,
    #[serde(default = "default_reps")]
    pub max_repetitions: usize,
    /// Also dump a finely sampled Bloch trajectory over this many units.
    #[serde(default)]
    pub trajectory_units: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitBlock {
    pub model: qubench_core::fitting::ModelKind,
    /// CSV file with columns x, y[, sem].
    pub data: String,
    #[serde(default)]
    pub initial: Option<Vec<f64>>,
}

/// Apply `--override key=value` pairs onto the raw JSON document before
/// typed parsing. Keys are dotted paths; values parse as JSON scalars with
/// a string fallback.
pub fn apply_overrides(doc: &mut serde_json::Value, overrides: &[(String, String)]) -> Result<()> {
    for (key, value) in overrides {
        let parsed: serde_json::Value = serde_json::from_str(value)
            .unwrap_or_else(|_| serde_json::Value::String(value.clone()));
        let mut cursor = &mut *doc;
        let parts: Vec<&str> = key.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            if i + 1 == parts.len() {
                match cursor {
                    serde_json::Value::Object(map) => {
                        map.insert(part.to_string(), parsed.clone());
                    }
                    _ => {
                        return Err(Error::InvalidParameter(format!(
                            "override path `{key}` does not address an object"
                        )))
                    }
                }
            } else {
                cursor = match cursor {
                    serde_json::Value::Object(map) => map
                        .entry(part.to_string())
                        .or_insert_with(|| serde_json::Value::Object(Default::default())),
                    _ => {
                        return Err(Error::InvalidParameter(format!(
                            "override path `{key}` does not address an object"
                        )))
                    }
                };
            }
        }
    }
    Ok(())
}

/// Parse a config document with JSON-pointer style error paths.
pub fn parse_config(doc: serde_json::Value) -> Result<RunConfig> {
    let deserializer = doc;
    serde_path_to_error::deserialize(deserializer).map_err(|e| {
        Error::InvalidParameter(format!("config error at /{}: {}", e.path(), e.inner()))
    })
}
