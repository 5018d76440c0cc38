//! Cross-entropy benchmarking of random brickwork circuits: linear and
//! unbiased XEB fidelity estimators, the log cross-entropy, and the
//! random-circuit-sampling sweep that fits the per-layer noise rate from
//! the exponential fidelity decay.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::statevector::{
    haar_unitary, pauli_trajectory_sample, statevector_apply, Circuit, Gate, PauliNoise,
};
use crate::fitting::{fit_multi_start, FitModel, ModelKind};
use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct XebEstimates {
    /// Linear estimator `(D/M) sum p_U(x_i) - 1`.
    pub f_xeb: f64,
    /// Unbiased estimator: the linear one over `D sum_x p_U(x)^2 - 1`.
    pub f_uxeb: f64,
    /// The unbiased denominator itself (approaches 1 for deep circuits).
    pub denominator: f64,
    /// Log cross-entropy `-sum_x ptilde(x) ln p_U(x)` on the empirical
    /// distribution.
    pub s_log: f64,
    /// Set when a zero ideal probability had to be clamped in the log.
    pub clamped_log: bool,
}

/// Compute the XEB estimators from sampled bitstrings and the full ideal
/// probability vector.
pub fn xeb_estimators(samples: &[usize], ideal_probs: &[f64]) -> Result<XebEstimates> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no samples".into()));
    }
    let d = ideal_probs.len() as f64;
    let m = samples.len() as f64;
    let mean_p: f64 = samples
        .iter()
        .map(|&x| {
            ideal_probs
                .get(x)
                .copied()
                .ok_or_else(|| Error::InvalidParameter(format!("bitstring {x} out of range")))
        })
        .sum::<Result<f64>>()?
        / m;
    let f_xeb = d * mean_p - 1.0;
    let denominator = d * ideal_probs.iter().map(|p| p * p).sum::<f64>() - 1.0;
    if denominator <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "unbiased denominator {denominator} <= 0"
        )));
    }
    let mut counts = std::collections::HashMap::new();
    for &x in samples {
        *counts.entry(x).or_insert(0usize) += 1;
    }
    let mut s_log = 0.0;
    let mut clamped_log = false;
    for (&x, &c) in &counts {
        let mut p = ideal_probs[x];
        if p < 1e-300 {
            p = 1e-300;
            clamped_log = true;
        }
        s_log -= (c as f64 / m) * p.ln();
    }
    Ok(XebEstimates {
        f_xeb,
        f_uxeb: f_xeb / denominator,
        denominator,
        s_log,
        clamped_log,
    })
}

/// Brickwork random circuit: every layer applies fresh Haar single-qubit
/// gates on all qubits followed by Haar two-qubit gates on alternating
/// neighbor pairs.
pub fn random_brickwork_circuit(n: usize, depth: usize, seed: u64) -> Circuit {
    let mut rng = rng::seeded(seed);
    let mut layers = Vec::with_capacity(depth);
    for layer in 0..depth {
        let mut gates: Vec<Gate> = (0..n).map(|q| Gate::one(q, &haar_unitary(2, &mut rng))).collect();
        let mut q = layer % 2;
        while q + 1 < n {
            gates.push(Gate::two(q, q + 1, haar_unitary(4, &mut rng)));
            q += 2;
        }
        layers.push(gates);
    }
    Circuit { n, layers }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RcsConfig {
    pub n_qubits: usize,
    /// Depths (two-qubit layer counts) to sweep, e.g. `1..=12`.
    pub depths: Vec<usize>,
    /// Random circuit instances per depth.
    pub instances: usize,
    /// Bitstring samples per instance.
    pub samples: usize,
    /// Total per-layer Pauli error rate, spread uniformly over all
    /// single-qubit X, Y, Z errors.
    pub noise_rate: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct XebResult {
    pub depths: Vec<usize>,
    /// Per-depth unbiased fidelity, averaged over instances.
    pub fidelity_mean: Vec<f64>,
    pub fidelity_sem: Vec<f64>,
    /// Per-depth linear (biased) estimator, for comparison.
    pub fidelity_linear: Vec<f64>,
    /// Per-depth unbiased-estimator denominators.
    pub denominators: Vec<f64>,
    pub amplitude: f64,
    pub lambda: f64,
    pub lambda_sigma: f64,
    pub instances: usize,
    pub samples: usize,
    pub seed: u64,
}

/// Random-circuit-sampling benchmark: per depth, average the unbiased XEB
/// fidelity over seeded circuit instances with Monte-Carlo Pauli noise, and
/// fit `F = A exp(-lambda P)`.
pub fn rcs_benchmark(config: &RcsConfig) -> Result<XebResult> {
    if config.n_qubits > 12 {
        return Err(Error::SizeLimit(
            "unbiased denominator requires the full probability vector; n <= 12".into(),
        ));
    }
    if config.depths.is_empty() || config.instances == 0 {
        return Err(Error::InvalidParameter("empty depth grid or instances".into()));
    }
    let noise = PauliNoise::uniform_single_qubit(config.n_qubits, config.noise_rate)?;
    let per_depth: Vec<(f64, f64, f64, f64)> = config
        .depths
        .par_iter()
        .enumerate()
        .map(|(di, &depth)| -> Result<(f64, f64, f64, f64)> {
            let mut vals = Vec::with_capacity(config.instances);
            let mut linears = Vec::with_capacity(config.instances);
            let mut denoms = Vec::with_capacity(config.instances);
            for inst in 0..config.instances {
                let circuit_seed = config
                    .seed
                    .wrapping_add(1)
                    .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                    .wrapping_add((di as u64) << 32)
                    .wrapping_add(inst as u64);
                let circuit = random_brickwork_circuit(config.n_qubits, depth, circuit_seed);
                let amps = statevector_apply(&circuit)?;
                let ideal: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
                let samples = pauli_trajectory_sample(
                    &circuit,
                    &noise,
                    circuit_seed.wrapping_add(0xD1B5_4A32_D192_ED03),
                    config.samples,
                )?;
                let est = xeb_estimators(&samples, &ideal)?;
                vals.push(est.f_uxeb);
                linears.push(est.f_xeb);
                denoms.push(est.denominator);
            }
            let m = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / m;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
            Ok((
                mean,
                (var / m).sqrt(),
                linears.iter().sum::<f64>() / m,
                denoms.iter().sum::<f64>() / m,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let fidelity_mean: Vec<f64> = per_depth.iter().map(|s| s.0).collect();
    let fidelity_sem: Vec<f64> = per_depth.iter().map(|s| s.1).collect();
    let fidelity_linear: Vec<f64> = per_depth.iter().map(|s| s.2).collect();
    let denominators: Vec<f64> = per_depth.iter().map(|s| s.3).collect();

    let x: Vec<f64> = config.depths.iter().map(|&p| p as f64).collect();
    let weights: Vec<f64> = fidelity_sem
        .iter()
        .map(|&s| 1.0 / s.max(1e-4).powi(2))
        .collect();
    let lambda0 = if fidelity_mean[0] > 0.0 {
        (-(fidelity_mean.last().unwrap().max(1e-3) / fidelity_mean[0]).ln()
            / (x.last().unwrap() - x[0]).max(1.0))
        .max(0.0)
    } else {
        0.05
    };
    let model = FitModel::new(ModelKind::RcsExp);
    let fit = fit_multi_start(
        &model,
        &x,
        &fidelity_mean,
        Some(&weights),
        &[
            vec![1.0, lambda0],
            vec![1.0, lambda0 * 2.0],
            vec![1.0, (lambda0 / 2.0).max(1e-6)],
        ],
    )?;
    if !fit.converged() {
        return Err(Error::FitFailure(format!(
            "decay fit status {:?}",
            fit.status
        )));
    }
    Ok(XebResult {
        depths: config.depths.clone(),
        fidelity_mean,
        fidelity_sem,
        fidelity_linear,
        denominators,
        amplitude: fit.parameters[0],
        lambda: fit.parameters[1],
        lambda_sigma: fit.uncertainties[1],
        instances: config.instances,
        samples: config.samples,
        seed: config.seed,
    })
}

/// Kolmogorov-Smirnov statistic of the rescaled ideal probabilities
/// `D p_U(x)` against the unit exponential distribution, with the 5%
/// critical value. Deep random circuits should pass (Porter-Thomas).
pub fn porter_thomas_ks(ideal_probs: &[f64]) -> (f64, f64) {
    let d = ideal_probs.len() as f64;
    let mut scaled: Vec<f64> = ideal_probs.iter().map(|&p| d * p).collect();
    scaled.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = scaled.len() as f64;
    let mut ks: f64 = 0.0;
    for (i, &v) in scaled.iter().enumerate() {
        let cdf = 1.0 - (-v).exp();
        let hi = (i as f64 + 1.0) / n - cdf;
        let lo = cdf - i as f64 / n;
        ks = ks.max(hi.max(lo));
    }
    // Stephens' approximation for the 5% critical value
    let critical = 1.358 / (n.sqrt() + 0.12 + 0.11 / n.sqrt());
    (ks, critical)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_samples_give_zero_fidelity() {
        // E[p_U] over the uniform distribution is 1/D, so f_xeb -> 0
        let n = 5usize;
        let circuit = random_brickwork_circuit(n, 10, 3);
        let ideal: Vec<f64> = statevector_apply(&circuit)
            .unwrap()
            .iter()
            .map(|a| a.norm_sqr())
            .collect();
        let mut rng = rng::seeded(4);
        use rand::Rng as _;
        let samples: Vec<usize> = (0..20_000).map(|_| rng.gen_range(0..1 << n)).collect();
        let est = xeb_estimators(&samples, &ideal).unwrap();
        assert!(est.f_xeb.abs() < 0.05, "f_xeb {}", est.f_xeb);
    }

    #[test]
    fn ideal_samples_give_unit_unbiased_fidelity() {
        let n = 5usize;
        let circuit = random_brickwork_circuit(n, 10, 7);
        let amps = statevector_apply(&circuit).unwrap();
        let ideal: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
        let noise = PauliNoise::new(vec![]).unwrap();
        let samples = pauli_trajectory_sample(&circuit, &noise, 11, 20_000).unwrap();
        let est = xeb_estimators(&samples, &ideal).unwrap();
        assert!(
            (est.f_uxeb - 1.0).abs() < 0.05,
            "f_uxeb {} (denominator {})",
            est.f_uxeb,
            est.denominator
        );
    }

    #[test]
    fn porter_thomas_holds_for_deep_circuits() {
        let circuit = random_brickwork_circuit(5, 12, 23);
        let ideal: Vec<f64> = statevector_apply(&circuit)
            .unwrap()
            .iter()
            .map(|a| a.norm_sqr())
            .collect();
        let (ks, critical) = porter_thomas_ks(&ideal);
        assert!(ks < critical, "KS {ks} vs critical {critical}");
    }

    #[test]
    fn zero_noise_sweep_has_tiny_lambda() {
        let config = RcsConfig {
            n_qubits: 3,
            depths: vec![1, 2, 4, 6, 8],
            instances: 4,
            samples: 2000,
            noise_rate: 0.0,
            seed: 5,
        };
        let r = rcs_benchmark(&config).unwrap();
        assert!(r.lambda < 0.01, "lambda {}", r.lambda);
        for f in &r.fidelity_mean {
            assert!((f - 1.0).abs() < 0.1);
        }
    }

    #[test]
    fn denominator_approaches_one_with_depth() {
        let shallow = random_brickwork_circuit(5, 1, 2);
        let deep = random_brickwork_circuit(5, 14, 2);
        let p_of = |c: &Circuit| -> Vec<f64> {
            statevector_apply(c)
                .unwrap()
                .iter()
                .map(|a| a.norm_sqr())
                .collect()
        };
        let den = |p: &[f64]| 32.0 * p.iter().map(|q| q * q).sum::<f64>() - 1.0;
        let d_shallow = den(&p_of(&shallow));
        let d_deep = den(&p_of(&deep));
        assert!(
            (d_deep - 1.0).abs() < (d_shallow - 1.0).abs(),
            "shallow {d_shallow}, deep {d_deep}"
        );
    }
}
