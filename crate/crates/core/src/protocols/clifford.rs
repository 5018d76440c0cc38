//! The 24-element single-qubit Clifford group with physical-pulse
//! decompositions, multiplication and inverse tables, and Bloch rotations.
//!
//! Decompositions are generated by breadth-first search over the primitive
//! set {±X90, ±Y90, X180, Y180} (identity idles), so every element uses at
//! most three physical pulses and the table is deterministic.

use nalgebra::Matrix3;

use crate::linalg::{c, cr, CMat};
use crate::pauli::PauliOp;
use crate::{Error, Result};

/// Physical pulse primitives available to the Clifford compiler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Primitive {
    X90,
    X90m,
    Y90,
    Y90m,
    X180,
    Y180,
}

impl Primitive {
    pub const ALL: [Primitive; 6] = [
        Primitive::X90,
        Primitive::X90m,
        Primitive::Y90,
        Primitive::Y90m,
        Primitive::X180,
        Primitive::Y180,
    ];

    pub fn is_pi_pulse(self) -> bool {
        matches!(self, Primitive::X180 | Primitive::Y180)
    }

    /// (axis phase, sign, rotation angle)
    pub fn pulse_params(self) -> (f64, f64, f64) {
        use std::f64::consts::{FRAC_PI_2, PI};
        match self {
            Primitive::X90 => (0.0, 1.0, FRAC_PI_2),
            Primitive::X90m => (0.0, -1.0, FRAC_PI_2),
            Primitive::Y90 => (FRAC_PI_2, 1.0, FRAC_PI_2),
            Primitive::Y90m => (FRAC_PI_2, -1.0, FRAC_PI_2),
            Primitive::X180 => (0.0, 1.0, PI),
            Primitive::Y180 => (FRAC_PI_2, 1.0, PI),
        }
    }

    pub fn unitary(self) -> CMat {
        let (phase, sign, angle) = self.pulse_params();
        rotation_unitary(phase, sign * angle)
    }
}

/// `exp(-i (theta/2) (cos(phase) X + sin(phase) Y))`.
pub fn rotation_unitary(phase: f64, theta: f64) -> CMat {
    let ch = (0.5 * theta).cos();
    let sh = (0.5 * theta).sin();
    let mut u = CMat::zeros(2, 2);
    u[(0, 0)] = cr(ch);
    u[(1, 1)] = cr(ch);
    u[(0, 1)] = c(0.0, -sh) * c(phase.cos(), -phase.sin());
    u[(1, 0)] = c(0.0, -sh) * c(phase.cos(), phase.sin());
    u
}

fn equal_up_to_phase(a: &CMat, b: &CMat) -> bool {
    // align phases on the largest entry of a
    let mut best = (0usize, 0usize);
    let mut mag = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            if a[(i, j)].norm() > mag {
                mag = a[(i, j)].norm();
                best = (i, j);
            }
        }
    }
    let bb = b[best];
    if bb.norm() < 1e-8 {
        return false;
    }
    let phase = a[best] / bb;
    crate::linalg::max_abs_diff(a, &(b * phase)) < 1e-8
}

/// The single-qubit Clifford group.
#[derive(Debug, Clone)]
pub struct CliffordGroup1Q {
    /// Canonical unitaries, index 0 is the identity.
    pub unitaries: Vec<CMat>,
    /// Physical-pulse decompositions in time order (first pulse first);
    /// index 0 (identity) is empty and idles for one gate duration.
    pub decompositions: Vec<Vec<Primitive>>,
    /// `product[i][j]` = index of `C_i . C_j` (i after j).
    pub product: Vec<Vec<usize>>,
    pub inverse: Vec<usize>,
    /// SO(3) Bloch rotations.
    pub rotations: Vec<Matrix3<f64>>,
}

impl CliffordGroup1Q {
    pub fn new() -> Result<Self> {
        // breadth-first search over pulse words
        let mut unitaries: Vec<CMat> = vec![CMat::identity(2, 2)];
        let mut decompositions: Vec<Vec<Primitive>> = vec![vec![]];
        let mut frontier: Vec<usize> = vec![0];
        while unitaries.len() < 24 && !frontier.is_empty() {
            let mut next = Vec::new();
            for &idx in &frontier {
                for prim in Primitive::ALL {
                    let u = prim.unitary() * &unitaries[idx];
                    if unitaries.iter().any(|v| equal_up_to_phase(v, &u)) {
                        continue;
                    }
                    let mut word = decompositions[idx].clone();
                    word.push(prim);
                    unitaries.push(u);
                    decompositions.push(word);
                    next.push(unitaries.len() - 1);
                }
            }
            frontier = next;
        }
        if unitaries.len() != 24 {
            return Err(Error::InvalidParameter(format!(
                "Clifford enumeration found {} elements",
                unitaries.len()
            )));
        }

        let find = |u: &CMat| -> Result<usize> {
            unitaries
                .iter()
                .position(|v| equal_up_to_phase(v, u))
                .ok_or_else(|| Error::InvalidParameter("product left the group".into()))
        };
        let mut product = vec![vec![0usize; 24]; 24];
        for i in 0..24 {
            for j in 0..24 {
                product[i][j] = find(&(&unitaries[i] * &unitaries[j]))?;
            }
        }
        let mut inverse = vec![0usize; 24];
        for i in 0..24 {
            inverse[i] = find(&unitaries[i].adjoint())?;
        }

        let paulis = crate::pauli::pauli_matrices_1q();
        let mut rotations = Vec::with_capacity(24);
        for u in &unitaries {
            let mut o = Matrix3::zeros();
            for (col, p) in paulis.iter().enumerate().skip(1) {
                let conj = u * p * u.adjoint();
                for row in 0..3 {
                    o[(row, col - 1)] = 0.5 * (&paulis[row + 1] * &conj).trace().re;
                }
            }
            rotations.push(o);
        }

        Ok(Self {
            unitaries,
            decompositions,
            product,
            inverse,
            rotations,
        })
    }

    pub fn len(&self) -> usize {
        24
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the inverse of a product word (first element applied
    /// first).
    pub fn inverse_of_word(&self, word: &[usize]) -> usize {
        let mut acc = 0usize;
        for &g in word {
            acc = self.product[g][acc];
        }
        self.inverse[acc]
    }

    /// Conjugation image of a single-qubit Pauli: returns `(pauli, sign)`
    /// with `C P C^dag = sign * P'`.
    pub fn conjugate_pauli(&self, clifford: usize, p: PauliOp) -> Result<(PauliOp, f64)> {
        let u = &self.unitaries[clifford];
        let img = u * p.matrix() * u.adjoint();
        for q in [PauliOp::X, PauliOp::Y, PauliOp::Z] {
            let qm = q.matrix();
            if crate::linalg::max_abs_diff(&img, &qm) < 1e-8 {
                return Ok((q, 1.0));
            }
            if crate::linalg::max_abs_diff(&img, &(-qm)) < 1e-8 {
                return Ok((q, -1.0));
            }
        }
        Err(Error::InvalidParameter(
            "conjugation image is not a signed Pauli".into(),
        ))
    }

    /// Fraction of pi/2 pulses over all decompositions.
    pub fn half_pi_fraction(&self) -> f64 {
        let mut half = 0usize;
        let mut full = 0usize;
        for word in &self.decompositions {
            for p in word {
                if p.is_pi_pulse() {
                    full += 1;
                } else {
                    half += 1;
                }
            }
        }
        half as f64 / (half + full) as f64
    }
}
