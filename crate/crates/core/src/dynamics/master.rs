//! Density-matrix time evolution under the Lindblad master equation, for
//! qubits (dim 2) and the three-level leakage model (dim 3).
//!
//! Piecewise-constant drives exponentiate the vectorized Liouvillian;
//! cosine envelopes integrate the density matrix with fixed-step RK4.

use crate::linalg::{cr, kron, vec_col, CMat};
use crate::noise::{lindblad_operators, NoiseParams};
use crate::pulse::{DrivePulse, Envelope, LeakageParams};
use crate::state::DensityMatrix;
use crate::{Error, Result};

use super::bloch::RK4_STEPS_PER_WINDOW;

/// The system a density matrix evolves under.
#[derive(Debug, Clone)]
pub enum DensitySystem {
    /// Two-level system with Markovian relaxation/dephasing.
    Qubit { noise: NoiseParams },
    /// Three-level drive-frame model; Lindblad operators optional (the
    /// leakage studies are closed-system).
    Qutrit {
        leakage: LeakageParams,
        lindblad: Vec<(CMat, f64)>,
    },
}

impl DensitySystem {
    pub fn dim(&self) -> usize {
        match self {
            DensitySystem::Qubit { .. } => 2,
            DensitySystem::Qutrit { .. } => 3,
        }
    }

    fn lindblad_ops(&self) -> Vec<(CMat, f64)> {
        match self {
            DensitySystem::Qubit { noise } => lindblad_operators(noise),
            DensitySystem::Qutrit { lindblad, .. } => lindblad.clone(),
        }
    }

    fn hamiltonian(&self, pulse: &DrivePulse, t: f64) -> CMat {
        match self {
            DensitySystem::Qubit { .. } => pulse.hamiltonian_qubit(t),
            DensitySystem::Qutrit { leakage, .. } => pulse.hamiltonian_qutrit(leakage, t),
        }
    }
}

/// Vectorized (column-stacking) Liouvillian
/// `L = -i (I ⊗ H - H^T ⊗ I) + sum_k gamma_k D[L_k]`.
pub fn liouvillian(h: &CMat, lops: &[(CMat, f64)]) -> CMat {
    let d = h.nrows();
    let id = CMat::identity(d, d);
    let i = crate::linalg::c(0.0, 1.0);
    let mut l = (kron(&id, h) - kron(&h.transpose(), &id)) * (-i);
    for (op, rate) in lops {
        let opc = op.map(|z| z.conj());
        let opd_op = op.adjoint() * op;
        let term = kron(&opc, op)
            - (kron(&id, &opd_op) + kron(&opd_op.transpose(), &id)).scale(0.5);
        l += term.scale(*rate);
    }
    l
}

fn lindblad_rhs(h: &CMat, lops: &[(CMat, f64)], rho: &CMat) -> CMat {
    let i = crate::linalg::c(0.0, 1.0);
    let mut out = (h * rho - rho * h) * (-i);
    for (op, rate) in lops {
        let od = op.adjoint();
        let anti = &od * op * rho + rho * (&od * op);
        out += ((op * rho * od) - anti.scale(0.5)).scale(*rate);
    }
    out
}

fn renormalize(rho: &mut CMat, trace_preserving: bool) {
    // symmetrize accumulated round-off; the physics preserves Hermiticity
    let herm = (rho.clone() + rho.adjoint()).scale(0.5);
    *rho = herm;
    if trace_preserving {
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > 1e-13 && tr > 0.0 {
            *rho = rho.scale(1.0 / tr);
        }
    }
}

/// Evolve a density matrix through a pulse train, returning the state after
/// every pulse (index 0 is the initial state). Trace and Hermiticity are
/// monitored to 1e-9 at every step.
pub fn evolve_density(
    pulses: &[DrivePulse],
    system: &DensitySystem,
    rho0: &DensityMatrix,
) -> Result<Vec<DensityMatrix>> {
    let d = system.dim();
    if rho0.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} vs system dim {d}",
            rho0.dim()
        )));
    }
    let lops = system.lindblad_ops();
    let mut rho = rho0.matrix().clone();
    let mut out = vec![rho0.clone()];
    for p in pulses {
        step_pulse(&mut rho, p, system, &lops)?;
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > 1e-9 {
            return Err(Error::Integrator(format!("trace drifted to {tr}")));
        }
        if crate::linalg::hermiticity_defect(&rho) > 1e-9 {
            return Err(Error::Integrator("Hermiticity lost".into()));
        }
        renormalize(&mut rho, true);
        out.push(DensityMatrix::new_unchecked(rho.clone()));
    }
    Ok(out)
}

fn step_pulse(
    rho: &mut CMat,
    p: &DrivePulse,
    system: &DensitySystem,
    lops: &[(CMat, f64)],
) -> Result<()> {
    let pad = p.padding();
    let d = system.dim();
    let idle = DrivePulse::free(1.0);
    if pad > 0.0 {
        let l = liouvillian(&system.hamiltonian(&idle, 0.5), lops);
        apply_expm(rho, &l, pad, d);
    }
    match (p.envelope, p.is_free()) {
        (_, true) | (Envelope::Square, false) => {
            let t_mid = pad + 0.5 * p.active_window;
            let l = liouvillian(&system.hamiltonian(p, t_mid), lops);
            apply_expm(rho, &l, p.active_window, d);
        }
        (Envelope::Cosine, false) => {
            let steps = RK4_STEPS_PER_WINDOW;
            let dt = p.active_window / steps as f64;
            let lo = pad;
            let hi = pad + p.active_window;
            for k in 0..steps {
                let t = pad + k as f64 * dt;
                // clamp against round-off at the window edges
                let h1 = system.hamiltonian(p, t.clamp(lo, hi));
                let h2 = system.hamiltonian(p, (t + 0.5 * dt).clamp(lo, hi));
                let h3 = system.hamiltonian(p, (t + dt).clamp(lo, hi));
                let k1 = lindblad_rhs(&h1, lops, rho);
                let k2 = lindblad_rhs(&h2, lops, &(rho.clone() + k1.scale(0.5 * dt)));
                let k3 = lindblad_rhs(&h2, lops, &(rho.clone() + k2.scale(0.5 * dt)));
                let k4 = lindblad_rhs(&h3, lops, &(rho.clone() + k3.scale(dt)));
                *rho += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(dt / 6.0);
            }
        }
    }
    if pad > 0.0 {
        let l = liouvillian(&system.hamiltonian(&idle, 0.5), lops);
        apply_expm(rho, &l, pad, d);
    }
    Ok(())
}

fn apply_expm(rho: &mut CMat, l: &CMat, dt: f64, d: usize) {
    let e = l.scale(cr(dt).re).exp();
    let v = e * vec_col(rho);
    *rho = crate::linalg::unvec_col(&v, d);
}
