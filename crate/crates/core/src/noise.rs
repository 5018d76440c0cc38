//! Markovian decoherence parameters: relaxation, dephasing, and finite
//! temperature via detailed balance.

use nalgebra::{Matrix3, Vector3};

use crate::linalg::{cr, CMat};
use crate::{Error, Result};

/// Relaxation/dephasing rates with an optional thermal factor.
///
/// `eta = 1` is the zero-temperature limit (relaxation only toward the
/// ground state); `eta = 0` is infinite temperature. The derived rates are
/// `gamma1 = 1/T1`, `gamma_phi = (2 T1 - T2)/(2 T1 T2)` and
/// `gamma2 = gamma1/2 + gamma_phi`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseParams {
    /// Relaxation time in seconds (`f64::INFINITY` disables relaxation).
    pub t1: f64,
    /// Coherence time in seconds (`f64::INFINITY` disables decoherence).
    pub t2: f64,
    /// Qubit angular frequency omega_01 in rad/s.
    pub omega01: f64,
    /// Thermal factor in [0, 1]; 1 means zero temperature.
    pub eta: f64,
}

impl NoiseParams {
    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        Self::with_thermal(t1, t2, DEFAULT_OMEGA01, 1.0)
    }

    pub fn with_thermal(t1: f64, t2: f64, omega01: f64, eta: f64) -> Result<Self> {
        if t1 <= 0.0 || t2 <= 0.0 {
            return Err(Error::InvalidParameter("T1 and T2 must be positive".into()));
        }
        if t2 > 2.0 * t1 * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "T2 = {t2} exceeds 2*T1 = {} (negative pure dephasing rate)",
                2.0 * t1
            )));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParameter(format!("eta {eta} outside [0,1]")));
        }
        Ok(Self {
            t1,
            t2,
            omega01,
            eta,
        })
    }

    /// Set the temperature through `k_B T` (in rad/s units, i.e. energy over
    /// hbar), fixing `eta` by detailed balance.
    pub fn with_temperature(t1: f64, t2: f64, omega01: f64, kbt: f64) -> Result<Self> {
        if kbt < 0.0 {
            return Err(Error::InvalidParameter("k_B T must be >= 0".into()));
        }
        let eta = eta_from_kbt(omega01, kbt);
        Self::with_thermal(t1, t2, omega01, eta)
    }

    pub fn noiseless() -> Self {
        Self {
            t1: f64::INFINITY,
            t2: f64::INFINITY,
            omega01: DEFAULT_OMEGA01,
            eta: 1.0,
        }
    }

    pub fn gamma1(&self) -> f64 {
        if self.t1.is_infinite() {
            0.0
        } else {
            1.0 / self.t1
        }
    }

    pub fn gamma_phi(&self) -> f64 {
        if self.t1.is_infinite() && self.t2.is_infinite() {
            return 0.0;
        }
        if self.t2.is_infinite() {
            // T2 = 2 T1 limit
            return 0.0;
        }
        if self.t1.is_infinite() {
            return 1.0 / self.t2;
        }
        (2.0 * self.t1 - self.t2) / (2.0 * self.t1 * self.t2)
    }

    pub fn gamma2(&self) -> f64 {
        0.5 * self.gamma1() + self.gamma_phi()
    }

    /// Pure dephasing time `T_phi = 2 T1 T2 / (2 T1 - T2)`; infinite when
    /// `T2 = 2 T1`.
    pub fn t_phi(&self) -> f64 {
        let gp = self.gamma_phi();
        if gp <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / gp
        }
    }

    /// `k_B T` recovered from `eta` by inverting detailed balance
    /// (rad/s units). Zero temperature maps to 0, infinite to infinity.
    pub fn kbt(&self) -> f64 {
        kbt_from_eta(self.omega01, self.eta)
    }
}

/// 4.37 GHz transmon-like qubit frequency, in rad/s.
pub const DEFAULT_OMEGA01: f64 = 2.0 * std::f64::consts::PI * 4.37e9;

/// Detailed-balance thermal factor
/// `eta = (1 - e^{-omega/kbt}) / (1 + e^{-omega/kbt})`.
pub fn eta_from_kbt(omega01: f64, kbt: f64) -> f64 {
    if kbt == 0.0 {
        return 1.0;
    }
    let b = (-omega01 / kbt).exp();
    (1.0 - b) / (1.0 + b)
}

/// Inverse of [`eta_from_kbt`]: `k_B T = omega / ln((1+eta)/(1-eta))`.
pub fn kbt_from_eta(omega01: f64, eta: f64) -> f64 {
    if eta >= 1.0 {
        return 0.0;
    }
    if eta <= 0.0 {
        return f64::INFINITY;
    }
    omega01 / ((1.0 + eta) / (1.0 - eta)).ln()
}

/// Bloch-picture dissipator `(R, c)` with
/// `R = diag(-gamma2, -gamma2, -gamma1)` and `c = (0, 0, eta*gamma1)`.
pub fn dissipator_bloch(np: &NoiseParams) -> (Matrix3<f64>, Vector3<f64>) {
    let g1 = np.gamma1();
    let g2 = np.gamma2();
    let r = Matrix3::from_diagonal(&Vector3::new(-g2, -g2, -g1));
    let c = Vector3::new(0.0, 0.0, np.eta * g1);
    (r, c)
}

/// Excitation/relaxation rate split `(gamma_plus, gamma_minus)` obeying
/// `gamma_- + gamma_+ = gamma1` and `gamma_+/gamma_- = e^{-omega/kbt}`.
pub fn thermal_rates(np: &NoiseParams) -> (f64, f64) {
    let g1 = np.gamma1();
    let gm = 0.5 * (1.0 + np.eta) * g1;
    let gp = 0.5 * (1.0 - np.eta) * g1;
    (gp, gm)
}

/// Lindblad operators with rates. Zero temperature gives
/// `{(sigma-, gamma1), (sigma_z/sqrt(2), gamma_phi)}`; finite temperature
/// splits relaxation into `sigma-` and `sigma+` by detailed balance.
pub fn lindblad_operators(np: &NoiseParams) -> Vec<(CMat, f64)> {
    let mut out = Vec::new();
    let sm = CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(0.0), cr(0.0)]);
    let sp = sm.adjoint();
    let sz_norm = CMat::from_row_slice(
        2,
        2,
        &[
            cr(std::f64::consts::FRAC_1_SQRT_2),
            cr(0.0),
            cr(0.0),
            cr(-std::f64::consts::FRAC_1_SQRT_2),
        ],
    );
    let (gp, gm) = thermal_rates(np);
    if gm > 0.0 {
        out.push((sm, gm));
    }
    if gp > 0.0 {
        out.push((sp, gp));
    }
    let gphi = np.gamma_phi();
    if gphi > 0.0 {
        out.push((sz_norm, gphi));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_rates_table() {
        // 20 us / 32 us device-style values
        let np = NoiseParams::new(20e-6, 32e-6).unwrap();
        let g1 = np.gamma1();
        assert!((g1 - 5.0e4).abs() < 1e-6);
        let gphi = (2.0 * 20e-6 - 32e-6) / (2.0 * 20e-6 * 32e-6);
        assert!((np.gamma_phi() - gphi).abs() < 1e-9);
        assert!((np.gamma2() - (0.5 * g1 + gphi)).abs() < 1e-9);
    }

    #[test]
    fn t2_bound_enforced() {
        assert!(NoiseParams::new(10e-6, 25e-6).is_err());
        assert!(NoiseParams::new(10e-6, 20e-6).is_ok());
    }

    #[test]
    fn no_noise_gives_zero_dissipator() {
        let np = NoiseParams::noiseless();
        let (r, c) = dissipator_bloch(&np);
        assert_eq!(r, Matrix3::zeros());
        assert_eq!(c, Vector3::zeros());
    }

    #[test]
    fn infinite_temperature_kills_drift() {
        let np = NoiseParams::with_thermal(20e-6, 30e-6, DEFAULT_OMEGA01, 0.0).unwrap();
        let (_, c) = dissipator_bloch(&np);
        assert_eq!(c, Vector3::zeros());
    }

    #[test]
    fn thermal_rate_limits() {
        let zero_t = NoiseParams::with_thermal(20e-6, 30e-6, DEFAULT_OMEGA01, 1.0).unwrap();
        let (gp, gm) = thermal_rates(&zero_t);
        assert_eq!(gp, 0.0);
        assert!((gm - zero_t.gamma1()).abs() < 1e-12);

        let hot = NoiseParams::with_thermal(20e-6, 30e-6, DEFAULT_OMEGA01, 0.0).unwrap();
        let (gp, gm) = thermal_rates(&hot);
        assert!((gp - gm).abs() < 1e-12);
        assert!((gp - 0.5 * hot.gamma1()).abs() < 1e-12);
    }

    #[test]
    fn detailed_balance_ln9_case() {
        // omega/kbt = ln 9 gives gamma+ = 0.1 gamma1, gamma- = 0.9 gamma1
        // and eta = 0.8: solve gamma+ + gamma- = gamma1, gamma+/gamma- = 1/9
        let omega = DEFAULT_OMEGA01;
        let kbt = omega / 9.0f64.ln();
        let np = NoiseParams::with_temperature(20e-6, 30e-6, omega, kbt).unwrap();
        assert!((np.eta - 0.8).abs() < 1e-12);
        let (gp, gm) = thermal_rates(&np);
        assert!((gp - 0.1 * np.gamma1()).abs() < 1e-9);
        assert!((gm - 0.9 * np.gamma1()).abs() < 1e-9);
    }

    #[test]
    fn eta_kbt_roundtrip() {
        let kbt = DEFAULT_OMEGA01 / 9.0f64.ln();
        let np = NoiseParams::with_temperature(20e-6, 30e-6, DEFAULT_OMEGA01, kbt).unwrap();
        let back = kbt_from_eta(np.omega01, np.eta);
        assert!((back - kbt).abs() / kbt < 1e-12);
    }

    #[test]
    fn eta_from_rates_matches_definition() {
        for eta in [0.0, 0.2, 0.55, 0.8, 1.0] {
            let np = NoiseParams::with_thermal(20e-6, 30e-6, DEFAULT_OMEGA01, eta).unwrap();
            let (gp, gm) = thermal_rates(&np);
            assert!(((gm - gp) / np.gamma1() - eta).abs() < 1e-12);
        }
    }

    #[test]
    fn t2_equals_2t1_means_no_dephasing() {
        let np = NoiseParams::new(10e-6, 20e-6).unwrap();
        assert!(np.gamma_phi().abs() < 1e-9);
        assert!(np.t_phi().is_infinite());
        let ops = lindblad_operators(&np);
        assert_eq!(ops.len(), 1); // relaxation only
    }

    #[test]
    fn lindblad_ops_match_bloch_dissipator() {
        // R_ij = (1/2) Tr(sigma_i L_D(sigma_j)), c_i = (1/2) Tr(sigma_i L_D(I))
        use crate::pauli::pauli_matrices_1q;
        let np = NoiseParams::with_thermal(23.36e-6, 44.13e-6, DEFAULT_OMEGA01, 0.7).unwrap();
        let ops = lindblad_operators(&np);
        let paulis = pauli_matrices_1q();
        let dissipate = |m: &CMat| -> CMat {
            let mut out = CMat::zeros(2, 2);
            for (l, rate) in &ops {
                let ld = l.adjoint();
                let anti = &ld * l * m + m * (&ld * l);
                out += (l * m * ld - anti.scale(0.5)).scale(*rate);
            }
            out
        };
        let (r, c) = dissipator_bloch(&np);
        for i in 0..3 {
            let ci = 0.5 * (&paulis[i + 1] * dissipate(&paulis[0])).trace().re;
            assert!((ci - c[i]).abs() < 1e-9, "c[{i}]");
            for j in 0..3 {
                let rij = 0.5 * (&paulis[i + 1] * dissipate(&paulis[j + 1])).trace().re;
                assert!((rij - r[(i, j)]).abs() < 1e-9, "R[{i}{j}]");
            }
        }
    }
}
