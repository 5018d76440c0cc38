//! Quantum states in density-matrix and Bloch-vector form.

use nalgebra::Vector3;

use crate::linalg::{cr, eigh, hermiticity_defect, CMat, CVec};
use crate::{Error, Result};

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

/// A validated density matrix: Hermitian, unit trace, positive semi-definite,
/// purity within `[1/D, 1]` up to tolerance. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    pub fn new(mat: CMat) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        let h = hermiticity_defect(&mat);
        if h > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian: max |rho - rho^dag| = {h:.3e}"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace = {tr} != 1")));
        }
        let (vals, _) = eigh(&mat);
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "not positive semi-definite: min eigenvalue = {min:.3e}"
            )));
        }
        let d = mat.nrows() as f64;
        let purity = (&mat * &mat).trace().re;
        if purity < 1.0 / d - PSD_TOL || purity > 1.0 + PSD_TOL {
            return Err(Error::InvalidState(format!(
                "purity {purity} outside [1/{d}, 1]"
            )));
        }
        Ok(Self { mat })
    }

    /// Skip validation. For hot loops on matrices already known valid.
    pub fn new_unchecked(mat: CMat) -> Self {
        Self { mat }
    }

    pub fn from_pure(psi: &CVec) -> Result<Self> {
        let n = psi.norm();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("state vector norm {n} != 1")));
        }
        let psi = psi.scale(1.0 / n);
        Ok(Self {
            mat: &psi * psi.adjoint(),
        })
    }

    pub fn computational(dim: usize, index: usize) -> Self {
        let mut m = CMat::zeros(dim, dim);
        m[(index, index)] = cr(1.0);
        Self { mat: m }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: CMat::identity(dim, dim).scale(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    /// Expectation value of a Hermitian observable.
    pub fn expect(&self, op: &CMat) -> f64 {
        (op * &self.mat).trace().re
    }

    /// Bloch vector of a qubit state.
    pub fn bloch(&self) -> Result<BlochState> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "Bloch vector requires dim 2, got {}",
                self.dim()
            )));
        }
        let m = &self.mat;
        let vx = 2.0 * m[(0, 1)].re;
        let vy = -2.0 * m[(0, 1)].im;
        let vz = (m[(0, 0)] - m[(1, 1)]).re;
        Ok(BlochState::new(Vector3::new(vx, vy, vz)))
    }
}

/// Expectation vector `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` of a qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub v: Vector3<f64>,
}

impl BlochState {
    pub fn new(v: Vector3<f64>) -> Self {
        Self { v }
    }

    pub fn ground() -> Self {
        Self::new(Vector3::new(0.0, 0.0, 1.0))
    }

    pub fn excited() -> Self {
        Self::new(Vector3::new(0.0, 0.0, -1.0))
    }

    pub fn plus() -> Self {
        Self::new(Vector3::new(1.0, 0.0, 0.0))
    }

    /// General pure state `|psi_{theta,phi}> = cos(theta/2)|0> +
    /// e^{i phi} sin(theta/2)|1>`.
    pub fn pure(theta: f64, phi: f64) -> Self {
        Self::new(Vector3::new(
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        ))
    }

    pub fn norm(&self) -> f64 {
        self.v.norm()
    }

    pub fn validate(&self) -> Result<()> {
        if self.norm() > 1.0 + 1e-9 {
            return Err(Error::InvalidState(format!(
                "Bloch vector norm {} exceeds 1",
                self.norm()
            )));
        }
        Ok(())
    }

    /// Density matrix `(I + v·sigma)/2`.
    pub fn density(&self) -> DensityMatrix {
        let mut m = CMat::identity(2, 2);
        m[(0, 0)] = cr(0.5 * (1.0 + self.v.z));
        m[(1, 1)] = cr(0.5 * (1.0 - self.v.z));
        m[(0, 1)] = crate::linalg::c(0.5 * self.v.x, -0.5 * self.v.y);
        m[(1, 0)] = crate::linalg::c(0.5 * self.v.x, 0.5 * self.v.y);
        DensityMatrix::new_unchecked(m)
    }

    /// Ground-state probability `(1 + v_z)/2`.
    pub fn p_ground(&self) -> f64 {
        0.5 * (1.0 + self.v.z)
    }

    /// Overlap fidelity with another (pure) Bloch vector: `(1 + v·w)/2`.
    pub fn overlap(&self, other: &BlochState) -> f64 {
        0.5 * (1.0 + self.v.dot(&other.v))
    }
}

/// Projective measurement: probabilities `p_k = Tr(P_k rho)` for a complete
/// orthogonal projector set, clamped to `[0, 1]`.
pub fn measure_projective(rho: &DensityMatrix, projectors: &[CMat]) -> Result<Vec<f64>> {
    let d = rho.dim();
    let mut sum = CMat::zeros(d, d);
    for (i, p) in projectors.iter().enumerate() {
        if p.nrows() != d || p.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "projector {i} is {}x{}, state dim {d}",
                p.nrows(),
                p.ncols()
            )));
        }
        for (j, q) in projectors.iter().enumerate() {
            let prod = p * q;
            let expect = if i == j { p.clone() } else { CMat::zeros(d, d) };
            if crate::linalg::max_abs_diff(&prod, &expect) > 1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "projectors {i},{j} are not orthogonal idempotents"
                )));
            }
        }
        sum += p;
    }
    if crate::linalg::max_abs_diff(&sum, &CMat::identity(d, d)) > 1e-10 {
        return Err(Error::InvalidParameter(
            "projector set incomplete: sum != identity".into(),
        ));
    }
    let probs: Vec<f64> = projectors
        .iter()
        .map(|p| rho.expect(p).clamp(0.0, 1.0))
        .collect();
    Ok(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn ground_state_z_measurement() {
        let rho = DensityMatrix::computational(2, 0);
        let p0 = DensityMatrix::computational(2, 0).into_matrix();
        let p1 = DensityMatrix::computational(2, 1).into_matrix();
        let probs = measure_projective(&rho, &[p0, p1]).unwrap();
        assert!((probs[0] - 1.0).abs() < 1e-15);
        assert!(probs[1].abs() < 1e-15);
    }

    #[test]
    fn plus_state_z_measurement() {
        let rho = BlochState::plus().density();
        let p0 = DensityMatrix::computational(2, 0).into_matrix();
        let p1 = DensityMatrix::computational(2, 1).into_matrix();
        let probs = measure_projective(&rho, &[p0, p1]).unwrap();
        assert!((probs[0] - 0.5).abs() < 1e-15);
        assert!((probs[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn maximally_mixed_in_bell_basis() {
        let rho = DensityMatrix::maximally_mixed(4);
        let bell = crate::channel::bell_projectors();
        let probs = measure_projective(&rho, &bell).unwrap();
        for p in probs {
            assert!((p - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn incomplete_projectors_rejected() {
        let rho = DensityMatrix::computational(2, 0);
        let p0 = DensityMatrix::computational(2, 0).into_matrix();
        assert!(measure_projective(&rho, &[p0]).is_err());
    }

    #[test]
    fn invalid_states_rejected() {
        // non-unit trace
        let m = CMat::identity(2, 2);
        assert!(DensityMatrix::new(m).is_err());
        // non-Hermitian
        let mut m = CMat::identity(2, 2).scale(0.5);
        m[(0, 1)] = c(0.3, 0.0);
        assert!(DensityMatrix::new(m).is_err());
        // negative eigenvalue
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = cr(1.5);
        m[(1, 1)] = cr(-0.5);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn bloch_roundtrip() {
        let v = BlochState::pure(1.1, -0.7);
        let rho = v.density();
        let w = rho.bloch().unwrap();
        assert!((v.v - w.v).norm() < 1e-14);
    }
}
