//! Standard quantum process tomography: prepare a complete operator basis
//! of inputs, measure the channel outputs against the same basis, and invert
//! the linear relation `B chi = lambda`.

use crate::channel::{check_conditioning, ProcessMatrix, QuantumChannel};
use crate::linalg::{c, cr, project_psd, solve, CMat, CVec};
use crate::pauli::pauli_basis;
use crate::state::DensityMatrix;
use crate::{Error, Result};

/// Workspace carrying the operator bases, the inversion matrix `B`, and the
/// collected measurement vector `lambda`.
#[derive(Debug, Clone)]
pub struct SqptWorkspace {
    pub dim: usize,
    /// Operator basis `rho_k = |m><n|`, flattened as `k = m D + n`.
    pub input_basis: Vec<CMat>,
    /// `B[(k,l), (m,n)] = Tr(rho_k E_m rho_l E_n)`, a D^4 x D^4 matrix.
    pub b_matrix: CMat,
    pub lambda: Option<CVec>,
    /// Physical (preparation, observable) settings the collection uses.
    pub configuration_count: usize,
}

/// Physical preparations that span the `|m><n|` basis by linearity: the `D`
/// populations plus, for every `m < n`, the two superposition states
/// `(|m> + |n>)/sqrt(2)` and `(|m> + i |n>)/sqrt(2)`.
pub fn physical_preparations(d: usize) -> Vec<DensityMatrix> {
    let mut preps = Vec::new();
    for m in 0..d {
        preps.push(DensityMatrix::computational(d, m));
    }
    for m in 0..d {
        for n in (m + 1)..d {
            let mut v = CVec::zeros(d);
            v[m] = cr(std::f64::consts::FRAC_1_SQRT_2);
            v[n] = cr(std::f64::consts::FRAC_1_SQRT_2);
            preps.push(DensityMatrix::from_pure(&v).unwrap());
            let mut w = CVec::zeros(d);
            w[m] = cr(std::f64::consts::FRAC_1_SQRT_2);
            w[n] = c(0.0, std::f64::consts::FRAC_1_SQRT_2);
            preps.push(DensityMatrix::from_pure(&w).unwrap());
        }
    }
    preps
}

fn matrix_unit(d: usize, m: usize, n: usize) -> CMat {
    let mut e = CMat::zeros(d, d);
    e[(m, n)] = cr(1.0);
    e
}

impl SqptWorkspace {
    pub fn new(dim: usize) -> Result<Self> {
        let n_qubits = (dim as f64).log2().round() as usize;
        if 1 << n_qubits != dim {
            return Err(Error::InvalidParameter(
                "dimension must be a power of two".into(),
            ));
        }
        let paulis: Vec<CMat> = pauli_basis(n_qubits)?
            .iter()
            .map(|p| p.matrix())
            .collect();
        let d2 = dim * dim;
        let mut input_basis = Vec::with_capacity(d2);
        for m in 0..dim {
            for n in 0..dim {
                input_basis.push(matrix_unit(dim, m, n));
            }
        }
        // B[(k,l),(m,n)] = Tr(rho_k E_m rho_l E_n)
        let mut b = CMat::zeros(d2 * d2, d2 * d2);
        for (k, rk) in input_basis.iter().enumerate() {
            for (l, rl) in input_basis.iter().enumerate() {
                let row = k * d2 + l;
                for (m, em) in paulis.iter().enumerate() {
                    for (n, en) in paulis.iter().enumerate() {
                        b[(row, m * d2 + n)] = (rk * em * rl * en).trace();
                    }
                }
            }
        }
        check_conditioning(&b, 1e10, "SQPT basis matrix")?;
        Ok(Self {
            dim,
            input_basis,
            b_matrix: b,
            lambda: None,
            configuration_count: d2 * d2,
        })
    }
}

/// Collect the measurement vector `lambda_kl = Tr(rho_k E(rho_l))` from a
/// channel oracle, building the non-Hermitian basis outputs by linearity
/// from the physical preparations.
pub fn sqpt_collect<F>(ws: &mut SqptWorkspace, mut oracle: F) -> Result<()>
where
    F: FnMut(&DensityMatrix) -> Result<DensityMatrix>,
{
    let d = ws.dim;
    let d2 = d * d;
    // channel outputs on the physical preparations
    let mut pop_out = vec![CMat::zeros(d, d); d];
    for (m, out) in pop_out.iter_mut().enumerate() {
        *out = oracle(&DensityMatrix::computational(d, m))?
            .into_matrix();
    }
    // outputs on the matrix-unit basis via the four-population identity:
    // |m><n| = |+><+| + i |+y><+y| - (1+i)/2 (|m><m| + |n><n|)
    let mut unit_out = vec![CMat::zeros(d, d); d2];
    for m in 0..d {
        for n in 0..d {
            let idx = m * d + n;
            if m == n {
                unit_out[idx] = pop_out[m].clone();
                continue;
            }
            let mut vp = CVec::zeros(d);
            vp[m] = cr(std::f64::consts::FRAC_1_SQRT_2);
            vp[n] = cr(std::f64::consts::FRAC_1_SQRT_2);
            let mut vy = CVec::zeros(d);
            vy[m] = cr(std::f64::consts::FRAC_1_SQRT_2);
            vy[n] = c(0.0, std::f64::consts::FRAC_1_SQRT_2);
            let out_p = oracle(&DensityMatrix::from_pure(&vp)?)?.into_matrix();
            let out_y = oracle(&DensityMatrix::from_pure(&vy)?)?.into_matrix();
            let half = c(0.5, 0.5);
            unit_out[idx] = &out_p + out_y * c(0.0, 1.0)
                - (&pop_out[m] + &pop_out[n]) * half;
        }
    }
    let mut lambda = CVec::zeros(d2 * d2);
    for (k, rk) in ws.input_basis.iter().enumerate() {
        for l in 0..d2 {
            lambda[k * d2 + l] = (rk * &unit_out[l]).trace();
        }
    }
    ws.lambda = Some(lambda);
    Ok(())
}

/// Invert `B chi = lambda` and return the process matrix. Noisy data is
/// Hermitized and PSD-projected when `project` is set.
pub fn sqpt_reconstruct(ws: &SqptWorkspace, project: bool) -> Result<ProcessMatrix> {
    let lambda = ws
        .lambda
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("no collected data; run sqpt_collect".into()))?;
    let chivec = solve(&ws.b_matrix, lambda)?;
    let d2 = ws.dim * ws.dim;
    let mut chi = CMat::zeros(d2, d2);
    for m in 0..d2 {
        for n in 0..d2 {
            chi[(m, n)] = chivec[m * d2 + n];
        }
    }
    let chi = if project {
        project_psd(&chi, true)
    } else {
        (&chi + chi.adjoint()).scale(0.5)
    };
    ProcessMatrix::new(ws.dim, chi)
}

/// One-call tomography of a channel (exact expectation values).
pub fn sqpt_channel(channel: &QuantumChannel) -> Result<ProcessMatrix> {
    let mut ws = SqptWorkspace::new(channel.dim)?;
    sqpt_collect(&mut ws, |rho| channel.apply(rho))?;
    sqpt_reconstruct(&ws, false)
}

/// Finite-shot tomography: every physical output state is re-estimated from
/// binomially sampled Pauli expectation values before the basis inversion,
/// modeling the experimental state-tomography stage.
pub fn sqpt_channel_shots(
    channel: &QuantumChannel,
    shots: u64,
    seed: u64,
) -> Result<ProcessMatrix> {
    if channel.dim != 2 {
        return Err(Error::InvalidParameter(
            "shot-sampled collection is single-qubit".into(),
        ));
    }
    let paulis = crate::pauli::pauli_matrices_1q();
    let mut counter = 0u64;
    let mut ws = SqptWorkspace::new(2)?;
    sqpt_collect(&mut ws, |rho| {
        let out = channel.apply(rho)?;
        let mut est = CMat::identity(2, 2).scale(0.5);
        for p in paulis.iter().skip(1) {
            let exact = out.expect(p).clamp(-1.0, 1.0);
            let mut r = crate::rng::derive(seed, counter);
            counter += 1;
            let q = 0.5 * (1.0 + exact);
            let sampled = 2.0 * crate::rng::binomial_fraction(&mut r, shots, q) - 1.0;
            est += p.scale(0.5 * sampled);
        }
        Ok(DensityMatrix::new_unchecked(est))
    })?;
    sqpt_reconstruct(&ws, true)
}
