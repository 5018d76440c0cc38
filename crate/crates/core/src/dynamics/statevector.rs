//! Dense n-qubit statevector kernel for random-circuit sampling, with
//! Haar-random gate generation and Monte-Carlo Pauli noise trajectories.
//!
//! Qubit 0 is the least significant bit of the computational index.

use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::linalg::{c, cr, CMat, C64};
use crate::pauli::{PauliOp, PauliString};
use crate::rng::Rng;
use crate::{Error, Result};

pub const MAX_STATEVECTOR_QUBITS: usize = 20;

#[derive(Debug, Clone)]
pub enum Gate {
    One { q: usize, m: [[C64; 2]; 2] },
    Two { a: usize, b: usize, m: CMat },
}

impl Gate {
    pub fn one(q: usize, m: &CMat) -> Self {
        Gate::One {
            q,
            m: [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]],
        }
    }

    pub fn two(a: usize, b: usize, m: CMat) -> Self {
        Gate::Two { a, b, m }
    }
}

/// Layered circuit; Pauli noise (when simulated) is inserted after every
/// layer.
#[derive(Debug, Clone, Default)]
pub struct Circuit {
    pub n: usize,
    pub layers: Vec<Vec<Gate>>,
}

#[derive(Debug, Clone)]
pub struct StateVector {
    pub n: usize,
    pub amps: Vec<C64>,
}

impl StateVector {
    pub fn zero(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_STATEVECTOR_QUBITS {
            return Err(Error::SizeLimit(format!(
                "statevector supports 1..={MAX_STATEVECTOR_QUBITS} qubits, got {n}"
            )));
        }
        let mut amps = vec![c(0.0, 0.0); 1 << n];
        amps[0] = cr(1.0);
        Ok(Self { n, amps })
    }

    pub fn apply_one(&mut self, q: usize, m: &[[C64; 2]; 2]) {
        let mask = 1usize << q;
        let dim = self.amps.len();
        let mut i = 0;
        while i < dim {
            if i & mask == 0 {
                let j = i | mask;
                let a0 = self.amps[i];
                let a1 = self.amps[j];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[j] = m[1][0] * a0 + m[1][1] * a1;
            }
            i += 1;
        }
    }

    /// Apply a 4x4 unitary to qubits `(a, b)`; `a` indexes the low bit of
    /// the 2-qubit subspace.
    pub fn apply_two(&mut self, a: usize, b: usize, m: &CMat) {
        assert_ne!(a, b);
        let ma = 1usize << a;
        let mb = 1usize << b;
        let dim = self.amps.len();
        for i in 0..dim {
            if i & ma == 0 && i & mb == 0 {
                let idx = [i, i | ma, i | mb, i | ma | mb];
                let orig = [
                    self.amps[idx[0]],
                    self.amps[idx[1]],
                    self.amps[idx[2]],
                    self.amps[idx[3]],
                ];
                for (r, &ir) in idx.iter().enumerate() {
                    let mut acc = c(0.0, 0.0);
                    for (s, &o) in orig.iter().enumerate() {
                        acc += m[(r, s)] * o;
                    }
                    self.amps[ir] = acc;
                }
            }
        }
    }

    pub fn apply_gate(&mut self, g: &Gate) {
        match g {
            Gate::One { q, m } => self.apply_one(*q, m),
            Gate::Two { a, b, m } => self.apply_two(*a, *b, m),
        }
    }

    pub fn apply_pauli(&mut self, p: &PauliString) {
        for (q, op) in p.labels.iter().enumerate() {
            match op {
                PauliOp::I => {}
                PauliOp::X => self.apply_one(q, &X_GATE),
                PauliOp::Y => self.apply_one(q, &Y_GATE),
                PauliOp::Z => self.apply_one(q, &Z_GATE),
            }
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Sample one bitstring from the Born distribution.
    pub fn sample(&self, rng: &mut Rng) -> usize {
        let r: f64 = rng.gen::<f64>() * self.norm_sqr();
        let mut acc = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            acc += a.norm_sqr();
            if r < acc {
                return i;
            }
        }
        self.amps.len() - 1
    }

    /// Overlap `|<self|other>|^2`.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        let mut acc = c(0.0, 0.0);
        for (a, b) in self.amps.iter().zip(&other.amps) {
            acc += a.conj() * b;
        }
        acc.norm_sqr()
    }
}

const X_GATE: [[C64; 2]; 2] = [
    [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
    [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
];
const Y_GATE: [[C64; 2]; 2] = [
    [C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
    [C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
];
const Z_GATE: [[C64; 2]; 2] = [
    [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    [C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
];

/// Run a circuit on |0...0> and return the final amplitudes.
pub fn statevector_apply(circuit: &Circuit) -> Result<Vec<C64>> {
    let mut sv = StateVector::zero(circuit.n)?;
    for layer in &circuit.layers {
        for g in layer {
            sv.apply_gate(g);
        }
    }
    Ok(sv.amps)
}

/// Haar-random unitary of dimension `d` via QR of a complex Gaussian matrix
/// with the R diagonal phases fixed.
pub fn haar_unitary(d: usize, rng: &mut Rng) -> CMat {
    let z = CMat::from_fn(d, d, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = z.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / cr(rjj.norm())
        } else {
            cr(1.0)
        };
        for i in 0..d {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Per-layer Pauli noise: a list of (error, probability) with total
/// probability at most one; the remainder is the identity.
#[derive(Debug, Clone)]
pub struct PauliNoise {
    pub terms: Vec<(PauliString, f64)>,
}

impl PauliNoise {
    pub fn new(terms: Vec<(PauliString, f64)>) -> Result<Self> {
        let total: f64 = terms.iter().map(|(_, p)| p).sum();
        if total > 1.0 + 1e-12 || terms.iter().any(|(_, p)| *p < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Pauli error rates sum to {total} > 1"
            )));
        }
        Ok(Self { terms })
    }

    /// Uniform single-qubit depolarizing-style noise: total rate `lambda`
    /// spread over all 3n single-qubit Pauli errors.
    pub fn uniform_single_qubit(n: usize, lambda: f64) -> Result<Self> {
        let mut terms = Vec::with_capacity(3 * n);
        for q in 0..n {
            for op in [PauliOp::X, PauliOp::Y, PauliOp::Z] {
                let mut labels = vec![PauliOp::I; n];
                labels[q] = op;
                terms.push((PauliString::new(labels), lambda / (3 * n) as f64));
            }
        }
        Self::new(terms)
    }

    pub fn total_rate(&self) -> f64 {
        self.terms.iter().map(|(_, p)| p).sum()
    }

    fn sample(&self, rng: &mut Rng) -> Option<&PauliString> {
        let r: f64 = rng.gen();
        let mut acc = 0.0;
        for (p, w) in &self.terms {
            acc += w;
            if r < acc {
                return Some(p);
            }
        }
        None
    }
}

/// Monte-Carlo trajectories of the noisy circuit: after every layer an
/// independent Pauli error is inserted per the noise distribution, then one
/// bitstring is sampled from the final state. Each returned bitstring comes
/// from its own trajectory.
pub fn pauli_trajectory_sample(
    circuit: &Circuit,
    noise: &PauliNoise,
    seed: u64,
    count: usize,
) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let mut rng = crate::rng::derive(seed, k as u64);
        let mut sv = StateVector::zero(circuit.n)?;
        for layer in &circuit.layers {
            for g in layer {
                sv.apply_gate(g);
            }
            if let Some(p) = noise.sample(&mut rng) {
                sv.apply_pauli(p);
            }
        }
        out.push(sv.sample(&mut rng));
    }
    Ok(out)
}

/// Convenience: dense matrix of a full circuit (for small n), used by
/// oracle tests.
pub fn circuit_unitary(circuit: &Circuit) -> Result<CMat> {
    let d = 1 << circuit.n;
    let mut u = DMatrix::zeros(d, d);
    for col in 0..d {
        let mut sv = StateVector::zero(circuit.n)?;
        sv.amps.iter_mut().for_each(|a| *a = c(0.0, 0.0));
        sv.amps[col] = cr(1.0);
        for layer in &circuit.layers {
            for g in layer {
                sv.apply_gate(g);
            }
        }
        for row in 0..d {
            u[(row, col)] = sv.amps[row];
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_circuit_is_ground_state() {
        let circuit = Circuit { n: 3, layers: vec![] };
        let amps = statevector_apply(&circuit).unwrap();
        assert!((amps[0] - cr(1.0)).norm() < 1e-15);
        assert!(amps[1..].iter().all(|a| a.norm() < 1e-15));
    }

    #[test]
    fn hadamard_superposition() {
        let h = CMat::from_row_slice(
            2,
            2,
            &[
                cr(std::f64::consts::FRAC_1_SQRT_2),
                cr(std::f64::consts::FRAC_1_SQRT_2),
                cr(std::f64::consts::FRAC_1_SQRT_2),
                cr(-std::f64::consts::FRAC_1_SQRT_2),
            ],
        );
        let circuit = Circuit {
            n: 1,
            layers: vec![vec![Gate::one(0, &h)]],
        };
        let amps = statevector_apply(&circuit).unwrap();
        assert!((amps[0].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((amps[1].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn random_circuit_stays_normalized() {
        let mut rng = crate::rng::seeded(5);
        let mut layers = Vec::new();
        for layer in 0..8 {
            let mut gates: Vec<Gate> = (0..5)
                .map(|q| Gate::one(q, &haar_unitary(2, &mut rng)))
                .collect();
            let start = layer % 2;
            let mut q = start;
            while q + 1 < 5 {
                gates.push(Gate::two(q, q + 1, haar_unitary(4, &mut rng)));
                q += 2;
            }
            layers.push(gates);
        }
        let circuit = Circuit { n: 5, layers };
        let amps = statevector_apply(&circuit).unwrap();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = crate::rng::seeded(9);
        for d in [2, 4] {
            let u = haar_unitary(d, &mut rng);
            let id = CMat::identity(d, d);
            assert!(crate::linalg::max_abs_diff(&(u.adjoint() * &u), &id) < 1e-12);
        }
    }

    #[test]
    fn noiseless_trajectories_follow_ideal_distribution() {
        // chi-squared test at 5% over 10^4 samples
        let mut rng = crate::rng::seeded(11);
        let mut layers = Vec::new();
        for layer in 0..6 {
            let mut gates: Vec<Gate> = (0..3)
                .map(|q| Gate::one(q, &haar_unitary(2, &mut rng)))
                .collect();
            let start = layer % 2;
            let mut q = start;
            while q + 1 < 3 {
                gates.push(Gate::two(q, q + 1, haar_unitary(4, &mut rng)));
                q += 2;
            }
            layers.push(gates);
        }
        let circuit = Circuit { n: 3, layers };
        let ideal: Vec<f64> = statevector_apply(&circuit)
            .unwrap()
            .iter()
            .map(|a| a.norm_sqr())
            .collect();
        let noise = PauliNoise::new(vec![]).unwrap();
        let samples = pauli_trajectory_sample(&circuit, &noise, 3, 10_000).unwrap();
        let mut counts = [0usize; 8];
        for s in samples {
            counts[s] += 1;
        }
        let chi2: f64 = (0..8)
            .map(|i| {
                let e = ideal[i] * 10_000.0;
                (counts[i] as f64 - e).powi(2) / e.max(1e-9)
            })
            .sum();
        // 7 degrees of freedom, 5% critical value
        assert!(chi2 < 14.07, "chi2 = {chi2}");
    }

    #[test]
    fn fully_depolarizing_layers_give_uniform_bitstrings() {
        let mut rng = crate::rng::seeded(13);
        let layers = vec![vec![
            Gate::one(0, &haar_unitary(2, &mut rng)),
            Gate::one(1, &haar_unitary(2, &mut rng)),
        ]; 4];
        let circuit = Circuit { n: 2, layers };
        // uniform over all 15 two-qubit Paulis = fully depolarizing
        let basis = crate::pauli::pauli_basis(2).unwrap();
        let terms: Vec<(PauliString, f64)> = basis
            .into_iter()
            .skip(1)
            .map(|p| (p, 15.0 / 16.0 / 15.0))
            .collect();
        let noise = PauliNoise::new(terms).unwrap();
        let samples = pauli_trajectory_sample(&circuit, &noise, 17, 20_000).unwrap();
        let mut counts = vec![0usize; 4];
        for s in samples {
            counts[s] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .map(|&k| (k as f64 - 5000.0).powi(2) / 5000.0)
            .sum();
        // 3 degrees of freedom, 5% critical value
        assert!(chi2 < 7.81, "chi2 = {chi2}, counts {counts:?}");
    }

    #[test]
    fn size_guard() {
        assert!(StateVector::zero(21).is_err());
    }
}
