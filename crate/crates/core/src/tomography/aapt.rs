//! Ancilla-assisted process tomography with joint separable measurements:
//! a faithful system-ancilla input state carries the channel action into
//! joint Pauli expectation values, and two matrix inversions recover chi.

use crate::channel::{check_conditioning, ProcessMatrix, QuantumChannel};
use crate::linalg::{cr, kron, solve, CMat, CVec};
use crate::pauli::pauli_basis;
use crate::state::DensityMatrix;
use crate::{Error, Result};

/// The maximally entangled two-qubit input, the optimal faithful state.
pub fn max_entangled_input() -> DensityMatrix {
    let v = crate::channel::max_entangled_state(2);
    DensityMatrix::new_unchecked(&v * v.adjoint())
}

/// Expansion coefficients `rho_AB = sum_ij coeff_ij E_i ⊗ E_j` as a 4x4
/// matrix; faithfulness of the input is invertibility of this matrix.
pub fn input_coefficients(rho_ab: &DensityMatrix) -> Result<CMat> {
    if rho_ab.dim() != 4 {
        return Err(Error::DimensionMismatch(
            "ancilla-assisted input must be a two-qubit state".into(),
        ));
    }
    let paulis: Vec<CMat> = pauli_basis(1)?.iter().map(|p| p.matrix()).collect();
    let mut coeff = CMat::zeros(4, 4);
    for (i, ei) in paulis.iter().enumerate() {
        for (j, ej) in paulis.iter().enumerate() {
            coeff[(i, j)] = (kron(ei, ej) * rho_ab.matrix()).trace() / cr(4.0);
        }
    }
    Ok(coeff)
}

/// Joint separable measurement table
/// `alpha_kj = Tr(rho'_AB (E_k ⊗ E_j)) / 4` on the channel output
/// `rho' = (E ⊗ I)(rho_AB)`.
pub fn aapt_collect(channel: &QuantumChannel, rho_ab: &DensityMatrix) -> Result<CMat> {
    if channel.dim != 2 {
        return Err(Error::DimensionMismatch(
            "separable ancilla-assisted tomography is single-qubit here".into(),
        ));
    }
    let kraus = channel.kraus_operators()?;
    let id = CMat::identity(2, 2);
    let extended: Vec<CMat> = kraus.iter().map(|a| kron(a, &id)).collect();
    let mut out = CMat::zeros(4, 4);
    for a in &extended {
        out += a * rho_ab.matrix() * a.adjoint();
    }
    let paulis: Vec<CMat> = pauli_basis(1)?.iter().map(|p| p.matrix()).collect();
    let mut table = CMat::zeros(4, 4);
    for (k, ek) in paulis.iter().enumerate() {
        for (j, ej) in paulis.iter().enumerate() {
            table[(k, j)] = (kron(ek, ej) * &out).trace() / cr(4.0);
        }
    }
    Ok(table)
}

/// Reconstruct chi from the joint measurement table: solve
/// `alpha = chi_tilde . coeff` for `chi_tilde`, then invert
/// `chi_tilde_ki = sum_mn alpha_k^{m,i,n} chi_mn` with
/// `alpha_k^{m,i,n} = Tr(E_k E_m E_i E_n)/D`.
pub fn aapt_reconstruct(table: &CMat, rho_ab: &DensityMatrix) -> Result<ProcessMatrix> {
    let coeff = input_coefficients(rho_ab)?;
    check_conditioning(&coeff, 1e8, "faithfulness of the input state")?;
    let inv = coeff
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::IllConditioned("input state is not faithful".into()))?;
    let chi_tilde = table * inv;

    let paulis: Vec<CMat> = pauli_basis(1)?.iter().map(|p| p.matrix()).collect();
    // m[(k,i),(m,n)] = Tr(E_k E_m E_i E_n)/2
    let mut m = CMat::zeros(16, 16);
    let mut rhs = CVec::zeros(16);
    for k in 0..4 {
        for i in 0..4 {
            rhs[k * 4 + i] = chi_tilde[(k, i)];
            for mm in 0..4 {
                for n in 0..4 {
                    m[(k * 4 + i, mm * 4 + n)] =
                        (&paulis[k] * &paulis[mm] * &paulis[i] * &paulis[n]).trace() / cr(2.0);
                }
            }
        }
    }
    let chivec = solve(&m, &rhs)?;
    let mut chi = CMat::zeros(4, 4);
    for mm in 0..4 {
        for n in 0..4 {
            chi[(mm, n)] = chivec[mm * 4 + n];
        }
    }
    let chi = (&chi + chi.adjoint()).scale(0.5);
    ProcessMatrix::new(2, chi)
}

/// One-call ancilla-assisted tomography with the maximally entangled input.
pub fn aapt_channel(channel: &QuantumChannel) -> Result<ProcessMatrix> {
    let input = max_entangled_input();
    let table = aapt_collect(channel, &input)?;
    aapt_reconstruct(&table, &input)
}
