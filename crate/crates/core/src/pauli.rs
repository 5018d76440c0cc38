//! Pauli operators and multi-qubit Pauli strings.

use crate::linalg::{c, cr, kron, CMat};
use crate::{Error, Result};

/// Largest qubit count for which a full Pauli basis may be enumerated.
pub const MAX_PAULI_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliOp {
    I,
    X,
    Y,
    Z,
}

impl PauliOp {
    pub fn matrix(self) -> CMat {
        match self {
            PauliOp::I => CMat::identity(2, 2),
            PauliOp::X => CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]),
            PauliOp::Y => {
                CMat::from_row_slice(2, 2, &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)])
            }
            PauliOp::Z => CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)]),
        }
    }

    pub fn label(self) -> char {
        match self {
            PauliOp::I => 'I',
            PauliOp::X => 'X',
            PauliOp::Y => 'Y',
            PauliOp::Z => 'Z',
        }
    }

    pub const ALL: [PauliOp; 4] = [PauliOp::I, PauliOp::X, PauliOp::Y, PauliOp::Z];
}

/// A signed word over {I, X, Y, Z}; the induced operator is
/// `sign * P_1 ⊗ ... ⊗ P_n` and satisfies `Tr(P_k P_l) = D delta_kl`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub labels: Vec<PauliOp>,
    pub sign: i8,
}

impl PauliString {
    pub fn new(labels: Vec<PauliOp>) -> Self {
        Self { labels, sign: 1 }
    }

    pub fn n_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.labels.len()
    }

    pub fn is_identity(&self) -> bool {
        self.labels.iter().all(|&p| p == PauliOp::I)
    }

    pub fn matrix(&self) -> CMat {
        let mut m = self.labels[0].matrix();
        for p in &self.labels[1..] {
            m = kron(&m, &p.matrix());
        }
        if self.sign < 0 {
            m = -m;
        }
        m
    }

    pub fn label(&self) -> String {
        let body: String = self.labels.iter().map(|p| p.label()).collect();
        if self.sign < 0 {
            format!("-{body}")
        } else {
            body
        }
    }
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Ordered Pauli basis on `n` qubits: 4^n strings in lexicographic order over
/// I < X < Y < Z, identity first.
pub fn pauli_basis(n: usize) -> Result<Vec<PauliString>> {
    if n == 0 || n > MAX_PAULI_QUBITS {
        return Err(Error::SizeLimit(format!(
            "pauli_basis supports 1..={MAX_PAULI_QUBITS} qubits, got {n}"
        )));
    }
    let count = 4usize.pow(n as u32);
    let mut out = Vec::with_capacity(count);
    for idx in 0..count {
        let mut labels = vec![PauliOp::I; n];
        let mut rem = idx;
        for q in (0..n).rev() {
            labels[q] = PauliOp::ALL[rem % 4];
            rem /= 4;
        }
        out.push(PauliString::new(labels));
    }
    Ok(out)
}

/// The four single-qubit Pauli matrices in basis order.
pub fn pauli_matrices_1q() -> [CMat; 4] {
    [
        PauliOp::I.matrix(),
        PauliOp::X.matrix(),
        PauliOp::Y.matrix(),
        PauliOp::Z.matrix(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_qubit_basis_order_and_normalization() {
        let basis = pauli_basis(1).unwrap();
        assert_eq!(basis.len(), 4);
        assert_eq!(basis[0].label(), "I");
        assert_eq!(basis[1].label(), "X");
        assert_eq!(basis[2].label(), "Y");
        assert_eq!(basis[3].label(), "Z");
        let x = basis[1].matrix();
        assert!(((&x * &x).trace().re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn two_qubit_orthogonality() {
        let basis = pauli_basis(2).unwrap();
        assert_eq!(basis.len(), 16);
        assert_eq!(basis[0].label(), "II");
        for (k, p) in basis.iter().enumerate() {
            for (l, q) in basis.iter().enumerate() {
                let t = (p.matrix() * q.matrix()).trace();
                let expect = if k == l { 4.0 } else { 0.0 };
                assert!((t.re - expect).abs() < 1e-12 && t.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn xy_product_trace_matches_direct_multiplication() {
        // Tr((XY)(XY)) computed by direct 4x4 multiplication
        let basis = pauli_basis(2).unwrap();
        let xy = basis
            .iter()
            .find(|p| p.label() == "XY")
            .unwrap()
            .matrix();
        let t = (&xy * &xy).trace();
        assert!((t.re - 4.0).abs() < 1e-12);
    }

    #[test]
    fn size_guard() {
        assert!(pauli_basis(0).is_err());
        assert!(pauli_basis(13).is_err());
    }
}
