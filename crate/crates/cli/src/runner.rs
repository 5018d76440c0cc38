//! Protocol dispatch: execute a validated configuration and produce a
//! results document plus plottable curves.

use serde_json::json;

use qubench_core::dynamics::{run_sequence, PairKind, Preparation, SequenceSpec};
use qubench_core::io::{Curve, ResultsDocument};
use qubench_core::linalg::cr;
use qubench_core::protocols::{self, CliffordGroup1Q};
use qubench_core::tomography;
use qubench_core::{CMat, Error, Result};

use crate::config::{DfeTarget, ProtocolId, RunConfig};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct RunOutput {
    pub document: ResultsDocument,
    /// Exit code: 0 success, 2 partial (flagged fits).
    pub exit_code: i32,
    /// Additional output files (name, content) beyond the curves.
    pub extra_files: Vec<(String, String)>,
}

fn document(
    config: &RunConfig,
    config_echo: serde_json::Value,
    results: serde_json::Value,
    curves: Vec<Curve>,
    flags: Vec<String>,
) -> RunOutput {
    let exit_code = if flags.is_empty() { 0 } else { 2 };
    RunOutput {
        document: ResultsDocument {
            protocol: config.protocol.name().to_string(),
            toolkit_version: TOOLKIT_VERSION.to_string(),
            seed: config.seed,
            config: config_echo,
            results,
            curves,
            flags,
        },
        exit_code,
        extra_files: Vec::new(),
    }
}

pub fn run(config: &RunConfig, config_echo: serde_json::Value) -> Result<RunOutput> {
    match config.protocol {
        ProtocolId::Db => run_db(config, config_echo),
        ProtocolId::Rb => run_rb(config, config_echo),
        ProtocolId::Irb => run_irb(config, config_echo),
        ProtocolId::Dfe => run_dfe(config, config_echo),
        ProtocolId::Pfe => run_pfe(config, config_echo),
        ProtocolId::Xeb | ProtocolId::Rcs => run_rcs(config, config_echo),
        ProtocolId::Sqpt | ProtocolId::Aapt | ProtocolId::Dcqd => run_tomo(config, config_echo),
        ProtocolId::Gst => run_gst(config, config_echo),
        ProtocolId::Simulate => run_simulate(config, config_echo),
        ProtocolId::Fit => run_fit(config, config_echo),
    }
}

fn load_record(path: &str) -> Result<qubench_core::dynamics::ExperimentRecord> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {path}: {e}")))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidParameter(format!("{path} is not an experiment record: {e}")))
}

fn run_db_import(
    config: &RunConfig,
    echo: serde_json::Value,
    paths: &[String],
) -> Result<RunOutput> {
    if paths.len() != 4 {
        return Err(Error::InvalidParameter(
            "record import expects exactly four files: free, XX, YY, XXbar".into(),
        ));
    }
    let records: Vec<_> = paths.iter().map(|p| load_record(p)).collect::<Result<_>>()?;
    let t_g = config.pulse_spec()?.gate_duration;
    let (params, fits) =
        protocols::db_fit_records(&records[0], &records[1], &records[2], &records[3], t_g)?;
    let ns = 1e9;
    let labels = ["free;1", "XX;+", "YY;+", "XXbar;+"];
    let curves: Vec<Curve> = records
        .iter()
        .zip(&fits)
        .zip(labels)
        .map(|((rec, fit), label)| Curve {
            label: label.into(),
            x: rec.times.iter().map(|t| t * ns).collect(),
            y_mean: rec.fidelities.clone(),
            y_sem: vec![],
            model: rec
                .times
                .iter()
                .map(|&t| qubench_core::fitting::ModelKind::DbFid.value(t, &fit.parameters))
                .collect(),
        })
        .collect();
    let results = json!({
        "t1_ns": params.t1 * ns,
        "t1_sigma_ns": params.t1_sigma * ns,
        "t2_ns": params.t2 * ns,
        "t2_sigma_ns": params.t2_sigma * ns,
        "t_phi_ns": if params.t_phi.is_finite() { json!(params.t_phi * ns) } else { json!("infinite") },
        "delta_theta_deg": params.delta_theta.to_degrees(),
        "delta_theta_sigma_deg": params.delta_theta_sigma.to_degrees(),
        "delta_phi_deg": params.delta_phi.to_degrees(),
        "delta_phi_sigma_deg": params.delta_phi_sigma.to_degrees(),
        "imported": true,
    });
    let flags = if params.t_phi_flagged {
        vec!["T2 exceeds 2*T1 within uncertainty; T_phi reported as infinite".into()]
    } else {
        vec![]
    };
    Ok(document(config, echo, results, curves, flags))
}

fn run_db(config: &RunConfig, echo: serde_json::Value) -> Result<RunOutput> {
    let block = RunConfig::require(&config.db, "db")?;
    if let Some(paths) = &block.import_records {
        return run_db_import(config, echo, paths);
    }
    let db_config = protocols::DbConfig {
        template: config.pulse_spec()?,
        noise: config.noise_params()?,
        repetitions: (1..=block.max_repetitions).collect(),
        shots: config.shots.unwrap_or(800),
        seed: config.seed,
        include_ur6: block.include_ur6,
    };
    let mut result = protocols::db_run(&db_config)?;
    let mut flags = Vec::new();
    if result.params.t_phi_flagged {
        flags.push("T2 exceeds 2*T1 within uncertainty; T_phi reported as infinite".into());
    }

    if let Some(seq_label) = &block.temperature_from {
        let pair = match seq_label.as_str() {
            "yybar" => PairKind::YyBar,
            "ybary" => PairKind::YBarY,
            "xx" => PairKind::Xx,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown temperature sequence `{other}`"
                )))
            }
        };
        let seq = SequenceSpec::new(Preparation::Plus, pair, db_config.repetitions.clone())?;
        let record = run_sequence(&seq, &db_config.template, &db_config.noise, 0, config.seed)?;
        let fit = qubench_core::fitting::fit_db_model(&record.times, &record.fidelities, None)?;
        let a = fit.parameters[0];
        match protocols::db_temperature(a, pair, Preparation::Plus, &db_config.template, &db_config.noise) {
            Ok(kbt) => result.kbt = Some(kbt),
            Err(e) => flags.push(format!("temperature extraction failed: {e}")),
        }
    }

    let ns = 1e9;
    let mut curves = Vec::new();
    for exp in result.learning.iter().chain(result.tests.iter()) {
        curves.push(Curve {
            label: exp.label.clone(),
            x: exp.record.times.iter().map(|t| t * ns).collect(),
            y_mean: exp.record.fidelities.clone(),
            y_sem: vec![],
            model: exp.prediction.clone(),
        });
    }
    let p = &result.params;
    let results = json!({
        "t1_ns": p.t1 * ns,
        "t1_sigma_ns": p.t1_sigma * ns,
        "t2_ns": p.t2 * ns,
        "t2_sigma_ns": p.t2_sigma * ns,
        "t_phi_ns": if p.t_phi.is_finite() { json!(p.t_phi * ns) } else { json!("infinite") },
        "delta_theta_deg": p.delta_theta.to_degrees(),
        "delta_theta_sigma_deg": p.delta_theta_sigma.to_degrees(),
        "delta_phi_deg": p.delta_phi.to_degrees(),
        "delta_phi_sigma_deg": p.delta_phi_sigma.to_degrees(),
        "test_rmse": result.test_rmse,
        "shot_noise_floor": result.shot_noise_floor,
        "kbt_rad_per_s": result.kbt,
    });
    Ok(document(config, echo, results, curves, flags))
}

fn rb_oracle(config: &RunConfig, group: &CliffordGroup1Q) -> Result<protocols::PulseOracle> {
    let template = config.pulse_spec()?;
    let (dtheta, dphi) = qubench_core::coherent_errors(&template)?;
    protocols::PulseOracle::new(group, &template, &config.noise_params()?, dtheta, dphi)
}

fn rb_curve(r: &protocols::RbResult) -> Curve {
    Curve {
        label: "rb_survival".into(),
        x: r.depths.iter().map(|&m| m as f64).collect(),
        y_mean: r.survival_mean.clone(),
        y_sem: r.survival_sem.clone(),
        model: r
            .depths
            .iter()
            .map(|&m| r.amplitude * r.decay.powf(m as f64) + r.offset)
            .collect(),
    }
}

fn rb_results_json(r: &protocols::RbResult) -> serde_json::Value {
    json!({
        "decay": r.decay,
        "decay_sigma": r.decay_sigma,
        "amplitude": r.amplitude,
        "offset": r.offset,
        "r_c": r.r_c,
        "r_c_sigma": r.r_c_sigma,
        "r_c_percent": 100.0 * r.r_c,
        "sequences": r.sequences,
        "degenerate": r.degenerate,
    })
}

fn run_rb(config: &RunConfig, echo: serde_json::Value) -> Result<RunOutput> {
    let block = config.rb.clone().unwrap_or(crate::config::RbBlock {
        depths: None,
        sequences: 30,
    });
    let group = CliffordGroup1Q::new()?;
    let oracle = rb_oracle(config, &group)?;
    let depths = block.depths.unwrap_or_else(protocols::default_depths);
    let r = protocols::rb_run(
        &group,
        &oracle,
        &depths,
        block.sequences,
        config.shots.unwrap_or(800),
        config.seed,
    )?;
    Ok(document(
        config,
        echo,
        rb_results_json(&r),
        vec![rb_curve(&r)],
        vec![],
    ))
}

fn run_irb(config: &RunConfig, echo: serde_json::Value) -> Result<RunOutput> {
    let block = RunConfig::require(&config.irb, "irb")?;
    if block.gate_index >= 24 {
        return Err(Error::InvalidParameter("gate_index must be < 24".into()));
    }
    let group = CliffordGroup1Q::new()?;
    let oracle = rb_oracle(config, &group)?;
    let depths = block.depths.clone().unwrap_or_else(protocols::default_depths);
    let shots = config.shots.unwrap_or(800);
    let baseline = protocols::rb_run(&group, &oracle, &depths, block.sequences, shots, config.seed)?;
    let irb = protocols::irb_run(
        &group,
        &oracle,
        block.gate_index,
        &baseline,
        &depths,
        block.sequences,
        shots,
        config.seed.wrapping_add(1),
    )?;
    let mut flags = Vec::new();
    if irb.unphysical {
        flags.push("interleaved estimate is unphysical (negative rate or bound exceeding 1)".into());
    }
    let results = json!({
        "baseline": rb_results_json(&irb.baseline),
        "interleaved": rb_results_json(&irb.interleaved),
        "r_gate": irb.r_gate,
        "error_bound": irb.error_bound,
        "unphysical": irb.unphysical,
    });
    let mut base_curve = rb_curve(&irb.baseline);
    base_curve.label = "rb_baseline".into();
    let mut inter_curve = rb_curve(&irb.interleaved);
    inter_curve.label = "rb_interleaved".into();
    Ok(document(config, echo, results, vec![base_curve, inter_curve], flags))
}

fn ghz_state(n: usize) -> qubench_core::DensityMatrix {
    let d = 1 << n;
    let mut v = qubench_core::CVec::zeros(d);
    v[0] = cr(std::f64::consts::FRAC_1_SQRT_2);
    v[d - 1] = cr(std::f64::consts::FRAC_1_SQRT_2);
    qubench_core::DensityMatrix::from_pure(&v).unwrap()
}

fn run_dfe(config: &RunConfig, echo: serde_json::Value) -> Result<RunOutput> {
    let block = RunConfig::require(&config.dfe, "dfe")?;
    let target = match block.target {
        DfeTarget::Ghz { qubits } => ghz_state(qubits),
        DfeTarget::Zero { qubits } => qubench_core::DensityMatrix::computational(1 << qubits, 0),
    };
    let d = target.dim();
    let mixed = qubench_core::DensityMatrix::maximally_mixed(d);
    let rho = qubench_core::DensityMatrix::new(
        target.matrix().scale(1.0 - block.noise_lambda)
            + mixed.matrix().scale(block.noise_lambda),
    )?;
    let exact = (target.matrix() * rho.matrix()).trace().re;
    let r = protocols::dfe_state(
        &target,
        &rho,
        block.samples,
        block.shots_per_index,
        block.epsilon1,
        block.epsilon2,
        config.seed,
    )?;
    let results = json!({
        "estimate": r.estimate,
        "standard_error": r.standard_error,
        "failure_bound": r.failure_bound,
        "exact_overlap": exact,
        "samples": block.samples,
        "shots_per_index": block.shots_per_index,
    });
    Ok(document(config, echo, results, vec![], vec![]))
}

/// Alternating Hadamard-all / CZ-chain circuit as a dense unitary.
pub fn layered_h_cz_unitary(n: usize, layers: usize) -> CMat {
    let d = 1 << n;
    let h1 = {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CMat::from_row_slice(2, 2, &[cr(s), cr(s), cr(s), cr(-s)])
    };
    let mut h_all = h1.clone();
    for _ in 1..n {
        h_all = qubench_core::linalg::kron(&h_all, &h1);
    }
    let mut cz_chain = CMat::identity(d, d);
    for q in 0..n.saturating_sub(1) {
        let mut cz = CMat::identity(d, d);
        for idx in 0..d {
            if idx & (1 << q) != 0 && idx & (1 << (q + 1)) != 0 {
                cz[(idx, idx)] = cr(-1.0);
            }
        }
        cz_chain = cz * cz_chain;
    }
    let mut u = CMat::identity(d, d);
    for _ in 0..layers {
        u = &cz_chain * &h_all * u;
    }
    u
}

fn run_pfe(config: &RunConfig, echo: serde_json::Value) -> Result<RunOutput> {
    let block = RunConfig::require(&config.pfe, "pfe")?;
    let u = layered_h_cz_unitary(block.qubits, block.layers);
    // global depolarizing toward the maximally mixed state with weight
    // lambda corresponds to Pauli-mixture weight lambda (D^2 - 1)/D^2
    let d2 = (1usize << (2 * block.qubits)) as f64;
    let p_pauli = block.noise_lambda * (d2 - 1.0) / d2;
    let dep = qubench_core::depolarizing_channel(p_pauli, block.qubits)?;
    let noisy = qubench_core::QuantumChannel::from_unitary(&u)?.then(&dep)?;
    let exact = protocols::pfe_exact(&u, &noisy)?;
    let r = protocols::pfe_run(&u, &noisy, block.samples, config.shots.unwrap_or(0), config.seed)?;
    let results = json!({
        "fidelity_squared": r.fidelity_squared,
        "fidelity": r.fidelity,
        "naive_squared": r.naive_squared,
        "exact_fidelity_squared": exact,
        "samples": r.samples,
    });
    Ok(document(config, echo, results, vec![], vec![]))
}

fn run_rcs(config: &RunConfig, echo: serde_json::Value) -> Result<RunOutput> {
    let block = RunConfig::require(&config.xeb, "xeb")?;
    let rcs_config = protocols::RcsConfig {
        n_qubits: block.qubits,
        depths: block.depths.clone(),
        instances: block.instances,
        samples: block.samples,
        noise_rate: block.noise_rate,
        seed: config.seed,
    };
    let r = protocols::rcs_benchmark(&rcs_config)?;
    let curve = Curve {
        label: "xeb_fidelity".into(),
        x: r.depths.iter().map(|&p| p as f64).collect(),
        y_mean: r.fidelity_mean.clone(),
        y_sem: r.fidelity_sem.clone(),
        model: r
            .depths
            .iter()
            .map(|&p| r.amplitude * (-r.lambda * p as f64).exp())
            .collect(),
    };
    let results = json!({
        "lambda": r.lambda,
        "lambda_sigma": r.lambda_sigma,
        "amplitude": r.amplitude,
        "noise_rate": block.noise_rate,
        "fidelity_linear": r.fidelity_linear,
        "denominators": r.denominators,
    });
    Ok(document(config, echo, results, vec![curve], vec![]))
}

fn run_tomo(config: &RunConfig, echo: serde_json::Value) -> Result<RunOutput> {
    let block = RunConfig::require(&config.tomo, "tomo")?;
    let channel = block.build_channel()?;
    let truth = channel.chi_matrix()?;
    let (chi, extra) = match config.protocol {
        ProtocolId::Sqpt => {
            let chi = tomography::sqpt_channel(&channel)?;
            (chi, json!({"configurations": 16}))
        }
        ProtocolId::Aapt => {
            let chi = tomography::aapt_channel(&channel)?;
            (chi, json!({"configurations": 16}))
        }
        ProtocolId::Dcqd => {
            let (chi, configs) =
                tomography::dcqd_single_qubit(&channel, &tomography::DcqdConfig::standard())?;
            (chi, json!({"configurations": configs}))
        }
        _ => unreachable!("tomo dispatch"),
    };
    let results = json!({
        "chi": qubench_core::io::chi_to_json(&chi),
        "chi_truth_frobenius_distance": chi.frobenius_distance(&truth),
        "detail": extra,
    });
    Ok(document(config, echo, results, vec![], vec![]))
}

fn run_gst(config: &RunConfig, echo: serde_json::Value) -> Result<RunOutput> {
    let block = RunConfig::require(&config.gst, "gst")?;
    let design = if block.germ_powers == vec![1] {
        tomography::GstDesign::standard()
    } else {
        tomography::GstDesign::long_sequence(&block.germ_powers)?
    };
    let truth = gst_truth_model(block.over_rotation_deg, block.depolarizing_p);
    design.check_fiducials(&truth)?;
    let data = tomography::gst_simulate_dataset(&truth, &design, block.shots, config.seed)?;
    let fit = tomography::gst_fit(&design, &data, block.extra_starts, config.seed, block.max_iterations)?;
    let mut flags = Vec::new();
    if !fit.converged {
        flags.push("gate-set fit hit the iteration cap".into());
    }
    let truth_moduli = truth.eigenvalue_moduli();
    let results = json!({
        "experiments": design.experiment_count(),
        "cost": fit.cost,
        "iterations": fit.iterations,
        "eigenvalue_moduli": fit.eigenvalue_moduli,
        "truth_eigenvalue_moduli": truth_moduli,
        "sqrt_x_angle_deg": fit.model().rotation_angle(1).to_degrees(),
        "predicted": fit.predicted,
        "measured": data.measured,
    });
    Ok(document(config, echo, results, vec![], flags))
}

/// Truth model for gate-set tomography simulations: ideal gates with an
/// over-rotated sqrtX and uniform depolarizing on every gate.
pub fn gst_truth_model(over_rotation_deg: f64, depolarizing_p: f64) -> tomography::GstModel {
    use qubench_core::protocols::clifford::rotation_unitary;
    use qubench_core::tomography::gst::ptm_of_unitary;
    let mut truth = tomography::GstModel::ideal();
    let angle = std::f64::consts::FRAC_PI_2 + over_rotation_deg.to_radians();
    truth.gates[1] = ptm_of_unitary(&rotation_unitary(0.0, angle));
    if depolarizing_p > 0.0 {
        let s = 1.0 - 4.0 * depolarizing_p / 3.0;
        let dep = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            1.0, s, s, s,
        ]));
        for g in truth.gates.iter_mut() {
            *g = &dep * g.clone();
        }
    }
    truth
}

fn run_simulate(config: &RunConfig, echo: serde_json::Value) -> Result<RunOutput> {
    let block = RunConfig::require(&config.simulate, "simulate")?;
    let seq = SequenceSpec::new(
        block.preparation,
        block.pair,
        (1..=block.max_repetitions).collect(),
    )?;
    let template = config.pulse_spec()?;
    let noise = config.noise_params()?;
    let record = run_sequence(&seq, &template, &noise, config.shots.unwrap_or(0), config.seed)?;
    let ns = 1e9;
    let curves = vec![Curve {
        label: format!("{}_{}", block.pair.label(), block.preparation.label()),
        x: record.times.iter().map(|t| t * ns).collect(),
        y_mean: record.fidelities.clone(),
        y_sem: vec![],
        model: vec![],
    }];
    let results = json!({
        "record": record,
    });
    let mut out = document(config, echo, results, curves, vec![]);
    out.extra_files.push((
        "simulate_record.json".into(),
        serde_json::to_string_pretty(&record)
            .map_err(|e| Error::InvalidParameter(format!("record serialization: {e}")))?,
    ));
    if let Some(units) = block.trajectory_units {
        let pulses: Vec<_> = (0..units).flat_map(|_| block.pair.unit(&template)).collect();
        let v0 = block.preparation.bloch();
        let traj = qubench_core::dynamics::sampled_trajectory(&pulses, &noise, &v0, 16)?;
        out.extra_files.push((
            "simulate_trajectory.csv".into(),
            qubench_core::io::trajectory_csv(&traj),
        ));
    }
    Ok(out)
}

fn run_fit(config: &RunConfig, echo: serde_json::Value) -> Result<RunOutput> {
    let block = RunConfig::require(&config.fit, "fit")?;
    let text = std::fs::read_to_string(&block.data)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", block.data)))?;
    let curve = qubench_core::io::parse_curve_csv(&text)?;
    let weights: Option<Vec<f64>> = if curve.y_sem.len() == curve.x.len()
        && curve.y_sem.iter().all(|&s| s > 0.0)
    {
        Some(curve.y_sem.iter().map(|s| 1.0 / (s * s)).collect())
    } else {
        None
    };
    let model = qubench_core::fitting::FitModel::new(block.model);
    let fit = match &block.initial {
        Some(init) => qubench_core::fitting::fit(
            &model,
            &curve.x,
            &curve.y_mean,
            weights.as_deref(),
            init,
        )?,
        None => match block.model {
            qubench_core::fitting::ModelKind::DbFid => {
                qubench_core::fitting::fit_db_model(&curve.x, &curve.y_mean, weights.as_deref())?
            }
            _ => {
                return Err(Error::InvalidParameter(
                    "this model needs explicit initial parameters".into(),
                ))
            }
        },
    };
    let mut flags = Vec::new();
    if !fit.converged() {
        flags.push(format!("fit status {:?}", fit.status));
    }
    let results = serde_json::to_value(&fit).unwrap();
    let model_curve = Curve {
        label: "fit".into(),
        x: curve.x.clone(),
        y_mean: curve.y_mean.clone(),
        y_sem: curve.y_sem.clone(),
        model: curve
            .x
            .iter()
            .map(|&x| block.model.value(x, &fit.parameters))
            .collect(),
    };
    Ok(document(config, echo, results, vec![model_curve], flags))
}
