//! Direct fidelity estimation: Monte-Carlo estimates of state and process
//! fidelities from importance-sampled Pauli expectation values.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::linalg::{dagger, CMat};
use crate::pauli::{pauli_basis, PauliString};
use crate::rng;
use crate::state::DensityMatrix;
use crate::{Error, Result};

/// Sampling plan: which Pauli indices were drawn, with what probabilities,
/// and the per-index shot budget.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DfePlan {
    pub sampled_indices: Vec<usize>,
    pub probabilities: Vec<f64>,
    pub shots_per_index: u64,
    pub epsilon1: f64,
    pub epsilon2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DfeStateResult {
    pub estimate: f64,
    /// Standard error of the Monte-Carlo mean.
    pub standard_error: f64,
    /// Bound on the probability that the estimate misses the true fidelity
    /// by more than `epsilon1 + epsilon2`.
    pub failure_bound: f64,
    pub plan: DfePlan,
}

/// Characteristic function `sigma_k = Tr(sigma P_k)` over the full Pauli
/// basis.
fn pauli_coefficients(rho: &CMat, basis: &[PauliString]) -> Vec<f64> {
    basis.iter().map(|p| (p.matrix() * rho).trace().re).collect()
}

fn sample_index(cdf: &[f64], rng: &mut rng::Rng) -> usize {
    let r: f64 = rng.gen();
    match cdf.binary_search_by(|probe| probe.partial_cmp(&r).unwrap()) {
        Ok(i) => i + 1,
        Err(i) => i,
    }
    .min(cdf.len() - 1)
}

/// Estimate `Tr(sigma rho)` for a pure target `sigma`: sample `n_samples`
/// Pauli indices from `Pr(k) = sigma_k^2 / D`, estimate each `Tr(rho P_k)`
/// from `shots_per_index` two-outcome measurements (exactly when
/// `shots_per_index = 0`), and average `x_k = rho_k / sigma_k`.
pub fn dfe_state(
    sigma: &DensityMatrix,
    rho: &DensityMatrix,
    n_samples: usize,
    shots_per_index: u64,
    epsilon1: f64,
    epsilon2: f64,
    seed: u64,
) -> Result<DfeStateResult> {
    if sigma.dim() != rho.dim() {
        return Err(Error::DimensionMismatch("state dimension mismatch".into()));
    }
    if (sigma.purity() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter("target state must be pure".into()));
    }
    if n_samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let d = sigma.dim();
    let n_qubits = (d as f64).log2().round() as usize;
    let basis = pauli_basis(n_qubits)?;
    let sigma_k = pauli_coefficients(sigma.matrix(), &basis);
    let rho_k = pauli_coefficients(rho.matrix(), &basis);

    // Pr(k) = sigma_k^2 / D; the support excludes sigma_k = 0 by
    // construction
    let probs: Vec<f64> = sigma_k.iter().map(|s| s * s / d as f64).collect();
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "sampling distribution sums to {total}"
        )));
    }
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in &probs {
        acc += p;
        cdf.push(acc);
    }

    let mut rng = rng::seeded(seed);
    let mut sampled = Vec::with_capacity(n_samples);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut inv_weight = 0.0;
    for _ in 0..n_samples {
        let k = sample_index(&cdf, &mut rng);
        sampled.push(k);
        let estimate = if shots_per_index == 0 || k == 0 {
            rho_k[k]
        } else {
            let q = 0.5 * (1.0 + rho_k[k].clamp(-1.0, 1.0));
            2.0 * rng::binomial_fraction(&mut rng, shots_per_index, q) - 1.0
        };
        let x = estimate / sigma_k[k];
        sum += x;
        sum_sq += x * x;
        inv_weight += 1.0 / (sigma_k[k] * sigma_k[k] * shots_per_index.max(1) as f64);
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let var = ((sum_sq / n) - mean * mean).max(0.0);
    let standard_error = (var / n).sqrt();

    let chebyshev = 1.0 / (n * epsilon1 * epsilon1);
    let hoeffding = 2.0 * (-0.5 * epsilon2 * epsilon2 * n * n / inv_weight).exp();
    let failure_bound = (chebyshev + hoeffding).min(1.0);

    Ok(DfeStateResult {
        estimate: mean,
        standard_error,
        failure_bound,
        plan: DfePlan {
            sampled_indices: sampled,
            probabilities: probs,
            shots_per_index,
            epsilon1,
            epsilon2,
        },
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DfeProcessResult {
    /// Monte-Carlo estimate of the process overlap
    /// `Tr(choi_ideal choi_noisy)`.
    pub process_fidelity: f64,
    /// Average output fidelity `(D F_proc + 1)/(D + 1)`.
    pub average_fidelity: f64,
    /// Entanglement fidelity `Tr(S_ideal^dag S_noisy)/D^2` computed exactly
    /// from superoperators, for cross-checking.
    pub entanglement_fidelity: f64,
    pub standard_error: f64,
    pub pair_count: usize,
}

/// Direct fidelity estimation of a noisy implementation of the unitary `u`.
///
/// Builds the set of Pauli pairs with `Tr(U(P_j) P_k) != 0`, importance
/// samples pairs with probability `Tr(U(P_j) P_k)^2 / D^4`, and estimates
/// each `Tr(Utilde(P_j) P_k)` from the `D` eigenstates of `P_j` pushed
/// through the noisy channel.
pub fn dfe_process(
    u: &CMat,
    noisy: &QuantumChannel,
    n_samples: usize,
    shots_per_eigenstate: u64,
    seed: u64,
) -> Result<DfeProcessResult> {
    let d = u.nrows();
    if noisy.dim != d {
        return Err(Error::DimensionMismatch("channel dimension mismatch".into()));
    }
    let n_qubits = (d as f64).log2().round() as usize;
    let basis = pauli_basis(n_qubits)?;
    let mats: Vec<CMat> = basis.iter().map(|p| p.matrix()).collect();

    // characteristic overlaps of the ideal unitary
    let mut pairs = Vec::new();
    let mut weights = Vec::new();
    let d4 = (d * d * d * d) as f64;
    for (j, pj) in mats.iter().enumerate() {
        let upju = u * pj * dagger(u);
        for (k, pk) in mats.iter().enumerate() {
            let t = (&upju * pk).trace().re;
            if t.abs() > 1e-10 {
                pairs.push((j, k, t));
                weights.push(t * t / d4);
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::InvalidParameter(
            "no nonzero Pauli overlaps; input is not unitary".into(),
        ));
    }
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for &w in &weights {
        acc += w;
        cdf.push(acc);
    }
    if (acc - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "pair distribution sums to {acc}"
        )));
    }

    // eigen-decompositions of each P_j are reused across samples
    let mut eig_cache: std::collections::HashMap<usize, (Vec<f64>, Vec<DensityMatrix>)> =
        std::collections::HashMap::new();

    let mut rng = rng::seeded(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n_samples {
        let idx = sample_index(&cdf, &mut rng);
        let (j, k, t_ideal) = pairs[idx];
        let (vals, states) = eig_cache.entry(j).or_insert_with(|| {
            let (vals, vecs) = crate::linalg::eigh(&mats[j]);
            let states = (0..d)
                .map(|i| {
                    let v = vecs.column(i).clone_owned();
                    DensityMatrix::new_unchecked(&v * v.adjoint())
                })
                .collect();
            (vals, states)
        });
        let mut t_noisy = 0.0;
        for (lam, state) in vals.iter().zip(states.iter()) {
            let out = noisy.apply(state)?;
            let expval = out.expect(&mats[k]);
            let measured = if shots_per_eigenstate == 0 {
                expval
            } else if basis[k].is_identity() {
                1.0
            } else {
                let q = 0.5 * (1.0 + expval.clamp(-1.0, 1.0));
                2.0 * rng::binomial_fraction(&mut rng, shots_per_eigenstate, q) - 1.0
            };
            t_noisy += lam * measured;
        }
        let x = t_noisy / t_ideal;
        sum += x;
        sum_sq += x * x;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let var = ((sum_sq / n) - mean * mean).max(0.0);

    // exact entanglement fidelity from superoperators
    let ideal = QuantumChannel::from_unitary(u)?;
    let s_ideal = ideal.superop_matrix()?;
    let s_noisy = noisy.superop_matrix()?;
    let entanglement_fidelity = (dagger(&s_ideal) * s_noisy).trace().re / (d * d) as f64;

    Ok(DfeProcessResult {
        process_fidelity: mean,
        average_fidelity: (d as f64 * mean + 1.0) / (d as f64 + 1.0),
        entanglement_fidelity,
        standard_error: (var / n).sqrt(),
        pair_count: pairs.len(),
    })
}
