//! Direct characterization of quantum dynamics for one qubit: four
//! entangled input configurations and a fixed Bell-state analyzer determine
//! the full process matrix without inverting a basis-change matrix.
//!
//! Configuration 1 (maximally entangled input) reads the chi diagonal off
//! the four Bell probabilities directly; configurations 2-4 use
//! non-maximally entangled inputs in the Z, X, and Y bases, whose
//! stabilizer/normalizer combinations form small linear systems for the
//! coherences (chi_03, chi_12), (chi_01, chi_23) and (chi_02, chi_13).

use nalgebra::DMatrix;

use crate::channel::{bell_projectors, ProcessMatrix, QuantumChannel};
use crate::linalg::{c, cr, kron, CMat, CVec, C64};
use crate::pauli::pauli_basis;
use crate::{Error, Result};

/// Amplitudes of the non-maximally entangled inputs
/// `alpha |00> + beta |11>` (and their X/Y-basis rotations).
#[derive(Debug, Clone, Copy)]
pub struct DcqdConfig {
    pub alpha: C64,
    pub beta: C64,
}

impl DcqdConfig {
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "|alpha|^2 + |beta|^2 = {norm} != 1"
            )));
        }
        let a = alpha.norm();
        if a < 1e-6 || (a - 1.0).abs() < 1e-6 || (a - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6
        {
            return Err(Error::InvalidParameter(
                "|alpha| must avoid {0, 1/sqrt(2), 1}".into(),
            ));
        }
        if (alpha * beta.conj()).im.abs() < 1e-9 {
            return Err(Error::InvalidParameter(
                "Im(alpha beta*) must be nonzero for the X/Y-basis inputs".into(),
            ));
        }
        Ok(Self { alpha, beta })
    }

    /// `alpha = sqrt(2/3)`, `beta = e^{i pi/4}/sqrt(3)`: satisfies every
    /// constraint and makes runs reproducible.
    pub fn standard() -> Self {
        let alpha = cr((2.0f64 / 3.0).sqrt());
        let phase = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let beta = phase / cr(3.0f64.sqrt());
        Self { alpha, beta }
    }
}

fn hadamard() -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_row_slice(2, 2, &[cr(s), cr(s), cr(s), cr(-s)])
}

fn phase_gate() -> CMat {
    CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), c(0.0, 1.0)])
}

/// The four input states of the protocol, in order: maximally entangled,
/// Z-basis, X-basis, Y-basis non-maximally entangled.
pub fn input_states(cfg: &DcqdConfig) -> Vec<CMat> {
    let mut phi_alpha = CVec::zeros(4);
    phi_alpha[0] = cfg.alpha;
    phi_alpha[3] = cfg.beta;
    let phi_plus = crate::channel::max_entangled_state(2);
    let h2 = kron(&hadamard(), &hadamard());
    let s2 = kron(&phase_gate(), &phase_gate());
    let x_basis = &h2 * &phi_alpha;
    let y_basis = &s2 * &h2 * &phi_alpha;
    [phi_plus, phi_alpha, x_basis, y_basis]
        .iter()
        .map(|v| v * v.adjoint())
        .collect()
}

/// Coherence pairs targeted by configurations 2-4.
const TARGET_PAIRS: [[(usize, usize); 2]; 3] = [
    [(0, 3), (1, 2)],
    [(0, 1), (2, 3)],
    [(0, 2), (1, 3)],
];

/// Bell-measurement probabilities of `(E ⊗ I)(rho_in)` as linear functions
/// of chi: returns the coefficient tensor `T[b][(m,n)]` with
/// `p_b = sum_mn chi_mn T[b][(m,n)]`.
fn coefficient_tensor(rho_in: &CMat) -> Vec<CMat> {
    let paulis: Vec<CMat> = pauli_basis(1)
        .unwrap()
        .iter()
        .map(|p| p.matrix())
        .collect();
    let id = CMat::identity(2, 2);
    let bells = bell_projectors();
    bells
        .iter()
        .map(|pb| {
            let mut t = CMat::zeros(4, 4);
            for (m, em) in paulis.iter().enumerate() {
                for (n, en) in paulis.iter().enumerate() {
                    let op = kron(em, &id) * rho_in * kron(en, &id);
                    t[(m, n)] = (pb * op).trace();
                }
            }
            t
        })
        .collect()
}

/// Exact Bell-basis probabilities for one configuration.
fn bell_probabilities(channel: &QuantumChannel, rho_in: &CMat) -> Result<[f64; 4]> {
    let kraus = channel.kraus_operators()?;
    let id = CMat::identity(2, 2);
    let mut out = CMat::zeros(4, 4);
    for a in &kraus {
        let ext = kron(a, &id);
        out += &ext * rho_in * ext.adjoint();
    }
    let bells = bell_projectors();
    let mut p = [0.0; 4];
    for (i, pb) in bells.iter().enumerate() {
        p[i] = (pb * &out).trace().re;
    }
    Ok(p)
}

/// Number of experimental configurations for `n` qudits of dimension `d`:
/// `(d^{4n}, d^{2n})` for standard tomography versus the direct scheme.
pub fn dcqd_resource_count(n: u32, d: u64) -> (u128, u128) {
    let d = d as u128;
    (d.pow(4 * n), d.pow(2 * n))
}

/// Run single-qubit direct characterization with exact expectation values:
/// exactly four oracle configurations. Returns the reconstructed chi and
/// the configuration count.
pub fn dcqd_single_qubit(
    channel: &QuantumChannel,
    cfg: &DcqdConfig,
) -> Result<(ProcessMatrix, usize)> {
    if channel.dim != 2 {
        return Err(Error::DimensionMismatch(
            "direct characterization here is single-qubit".into(),
        ));
    }
    let inputs = input_states(cfg);
    let mut chi = CMat::zeros(4, 4);

    // configuration 1: the chi diagonal is the Bell distribution itself
    let p0 = bell_probabilities(channel, &inputs[0])?;
    for (m, &p) in p0.iter().enumerate() {
        chi[(m, m)] = cr(p);
    }

    // configurations 2-4: per configuration, the four Bell probabilities
    // are linear in the two targeted coherences (with known diagonal
    // contributions); solve the 4x4 real system for (Re, Im) of both
    for (conf, targets) in TARGET_PAIRS.iter().enumerate() {
        let rho_in = &inputs[conf + 1];
        let tensor = coefficient_tensor(rho_in);
        let probs = bell_probabilities(channel, rho_in)?;
        let mut a = DMatrix::<f64>::zeros(4, 4);
        let mut rhs = DMatrix::<f64>::zeros(4, 1);
        for b in 0..4 {
            let t = &tensor[b];
            let mut known = 0.0;
            for m in 0..4 {
                known += chi[(m, m)].re * t[(m, m)].re;
            }
            rhs[(b, 0)] = probs[b] - known;
            for (ti, &(m, n)) in targets.iter().enumerate() {
                // chi_mn T_mn + conj contribution:
                // 2 [Re chi Re T - Im chi Im T]
                a[(b, 2 * ti)] = 2.0 * t[(m, n)].re;
                a[(b, 2 * ti + 1)] = -2.0 * t[(m, n)].im;
            }
            // verify the probabilities involve no other coherences
            for m in 0..4 {
                for n in (m + 1)..4 {
                    if targets.contains(&(m, n)) {
                        continue;
                    }
                    if t[(m, n)].norm() > 1e-10 {
                        return Err(Error::InvalidParameter(format!(
                            "configuration {} leaks coherence ({m},{n})",
                            conf + 2
                        )));
                    }
                }
            }
        }
        let sol = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::IllConditioned("singular coherence system".into()))?;
        for (ti, &(m, n)) in targets.iter().enumerate() {
            let val = c(sol[(2 * ti, 0)], sol[(2 * ti + 1, 0)]);
            chi[(m, n)] = val;
            chi[(n, m)] = val.conj();
        }
    }

    Ok((ProcessMatrix::new(2, chi)?, 4))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::depolarizing_channel;
    use crate::linalg::max_abs_diff;

    #[test]
    fn config_constraints_enforced() {
        assert!(DcqdConfig::new(cr(1.0), cr(0.0)).is_err());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(DcqdConfig::new(cr(s), cr(s)).is_err());
        // real amplitudes violate the Im(alpha beta*) constraint
        assert!(DcqdConfig::new(cr((2.0f64 / 3.0).sqrt()), cr((1.0f64 / 3.0).sqrt())).is_err());
        DcqdConfig::standard();
        assert!(DcqdConfig::new(DcqdConfig::standard().alpha, DcqdConfig::standard().beta).is_ok());
    }

    #[test]
    fn identity_channel_is_chi00() {
        let (chi, configs) =
            dcqd_single_qubit(&QuantumChannel::identity(2), &DcqdConfig::standard()).unwrap();
        assert_eq!(configs, 4);
        let mut expect = CMat::zeros(4, 4);
        expect[(0, 0)] = cr(1.0);
        assert!(max_abs_diff(&chi.mat, &expect) < 1e-10);
    }

    #[test]
    fn bit_flip_channel_populations() {
        // E(rho) = 0.8 rho + 0.2 X rho X: Bell distribution (0.8, 0.2, 0, 0)
        let x = crate::pauli::PauliOp::X.matrix();
        let kraus = vec![
            CMat::identity(2, 2).scale(0.8f64.sqrt()),
            x.scale(0.2f64.sqrt()),
        ];
        let ch = QuantumChannel::from_kraus(2, kraus).unwrap();
        let inputs = input_states(&DcqdConfig::standard());
        let p = bell_probabilities(&ch, &inputs[0]).unwrap();
        assert!((p[0] - 0.8).abs() < 1e-12);
        assert!((p[1] - 0.2).abs() < 1e-12);
        assert!(p[2].abs() < 1e-12 && p[3].abs() < 1e-12);
        let (chi, _) = dcqd_single_qubit(&ch, &DcqdConfig::standard()).unwrap();
        assert!((chi.mat[(0, 0)].re - 0.8).abs() < 1e-10);
        assert!((chi.mat[(1, 1)].re - 0.2).abs() < 1e-10);
    }

    #[test]
    fn random_channel_matches_ground_truth() {
        let u = crate::protocols::clifford::rotation_unitary(0.7, 0.9);
        let dep = depolarizing_channel(0.15, 1).unwrap();
        let ch = QuantumChannel::from_unitary(&u).unwrap().then(&dep).unwrap();
        let truth = ch.chi_matrix().unwrap();
        let (chi, _) = dcqd_single_qubit(&ch, &DcqdConfig::standard()).unwrap();
        assert!(
            chi.frobenius_distance(&truth) < 1e-9,
            "distance {}",
            chi.frobenius_distance(&truth)
        );
    }

    #[test]
    fn resource_counts() {
        assert_eq!(dcqd_resource_count(1, 2), (16, 4));
        assert_eq!(dcqd_resource_count(3, 2), (4096, 64));
        assert_eq!(dcqd_resource_count(4, 2), (65536, 256));
    }
}
