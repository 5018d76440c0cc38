//! Quantum channels in four interconvertible representations, plus the
//! fidelity measures built on them.
//!
//! Superoperators use column-stacking vectorization throughout, so
//! `vec(A rho B) = (B^T ⊗ A) vec(rho)` and a Kraus set `{A_i}` has
//! superoperator `S = sum_i conj(A_i) ⊗ A_i`.

use crate::linalg::{
    c, condition_number, cr, dagger, eigh, hermiticity_defect, kron, max_abs_diff, solve,
    sqrtm_psd, trace_norm, unvec_col, vec_col, CMat, CVec,
};
use crate::pauli::{pauli_basis, PauliString};
use crate::state::DensityMatrix;
use crate::{Error, Result};

pub const CHANNEL_TOL: f64 = 1e-10;

/// Process matrix chi with respect to an ordered Pauli basis:
/// `E(rho) = sum_{mn} chi_mn E_m rho E_n`.
#[derive(Debug, Clone)]
pub struct ProcessMatrix {
    pub dim: usize,
    pub basis: Vec<PauliString>,
    pub mat: CMat,
}

impl ProcessMatrix {
    pub fn new(dim: usize, mat: CMat) -> Result<Self> {
        let n = (dim as f64).log2().round() as usize;
        if 1 << n != dim {
            return Err(Error::InvalidParameter(format!(
                "process matrix dimension {dim} is not a power of two"
            )));
        }
        let basis = pauli_basis(n)?;
        if mat.nrows() != dim * dim || mat.ncols() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "chi must be {0}x{0} for dim {dim}",
                dim * dim
            )));
        }
        Ok(Self { dim, basis, mat })
    }

    /// Hermiticity defect, PSD floor and trace-preservation defect,
    /// for validity checks.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.mat)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let (vals, _) = eigh(&(&self.mat + self.mat.adjoint()).scale(0.5));
        vals.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Max over k of `|sum_ij chi_ij Tr(E_i E_k E_j)/D - delta_k0|`
    /// (trace preservation defect).
    pub fn trace_preservation_defect(&self) -> f64 {
        let d = self.dim as f64;
        let mats: Vec<CMat> = self.basis.iter().map(|p| p.matrix()).collect();
        let mut worst: f64 = 0.0;
        for (k, ek) in mats.iter().enumerate() {
            let mut acc = c(0.0, 0.0);
            for (i, ei) in mats.iter().enumerate() {
                for (j, ej) in mats.iter().enumerate() {
                    acc += self.mat[(i, j)] * (ei * ek * ej).trace() / cr(d);
                }
            }
            let target = if k == 0 { 1.0 } else { 0.0 };
            worst = worst.max((acc - cr(target)).norm());
        }
        worst
    }

    /// Frobenius distance to another chi matrix.
    pub fn frobenius_distance(&self, other: &ProcessMatrix) -> f64 {
        (&self.mat - &other.mat).norm()
    }
}

#[derive(Debug, Clone)]
pub enum Representation {
    Kraus(Vec<CMat>),
    Chi(ProcessMatrix),
    Superop(CMat),
    Choi(CMat),
}

impl Representation {
    pub fn tag(&self) -> &'static str {
        match self {
            Representation::Kraus(_) => "kraus",
            Representation::Chi(_) => "chi",
            Representation::Superop(_) => "superop",
            Representation::Choi(_) => "choi",
        }
    }
}

/// A quantum channel on a `dim`-dimensional system.
///
/// Validity (Kraus completeness / Choi positivity) is checked on
/// construction by default; `new_unchecked` skips this for hot loops.
/// Trace-decreasing channels (leakage) are admitted when flagged.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    pub dim: usize,
    rep: Representation,
    pub trace_decreasing: bool,
}

impl QuantumChannel {
    pub fn new(dim: usize, rep: Representation) -> Result<Self> {
        let ch = Self {
            dim,
            rep,
            trace_decreasing: false,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn new_trace_decreasing(dim: usize, rep: Representation) -> Result<Self> {
        let ch = Self {
            dim,
            rep,
            trace_decreasing: true,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn new_unchecked(dim: usize, rep: Representation) -> Self {
        Self {
            dim,
            rep,
            trace_decreasing: false,
        }
    }

    pub fn representation(&self) -> &Representation {
        &self.rep
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim;
        match &self.rep {
            Representation::Kraus(ops) => {
                if ops.is_empty() {
                    return Err(Error::InvalidChannel("empty Kraus set".into()));
                }
                let mut acc = CMat::zeros(d, d);
                for a in ops {
                    if a.nrows() != d || a.ncols() != d {
                        return Err(Error::DimensionMismatch(
                            "Kraus operator dimension mismatch".into(),
                        ));
                    }
                    acc += dagger(a) * a;
                }
                let id = CMat::identity(d, d);
                if self.trace_decreasing {
                    // require sum A^dag A <= I
                    let (vals, _) = eigh(&(id - acc));
                    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                    if min < -CHANNEL_TOL {
                        return Err(Error::InvalidChannel(format!(
                            "Kraus sum exceeds identity by {min:.3e}"
                        )));
                    }
                } else if max_abs_diff(&acc, &id) > CHANNEL_TOL {
                    return Err(Error::InvalidChannel(format!(
                        "Kraus completeness defect {:.3e}",
                        max_abs_diff(&acc, &id)
                    )));
                }
            }
            Representation::Chi(chi) => {
                if chi.dim != d {
                    return Err(Error::DimensionMismatch("chi dimension mismatch".into()));
                }
                if chi.hermiticity_defect() > CHANNEL_TOL {
                    return Err(Error::InvalidChannel("chi not Hermitian".into()));
                }
                if chi.min_eigenvalue() < -1e-8 {
                    return Err(Error::InvalidChannel(format!(
                        "chi not PSD: min eigenvalue {:.3e}",
                        chi.min_eigenvalue()
                    )));
                }
            }
            Representation::Superop(s) => {
                if s.nrows() != d * d || s.ncols() != d * d {
                    return Err(Error::DimensionMismatch(
                        "superoperator dimension mismatch".into(),
                    ));
                }
                // complete positivity via the Choi state
                let choi = self.choi_matrix()?;
                let (vals, _) = eigh(&choi);
                let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                if min < -CHANNEL_TOL {
                    return Err(Error::InvalidChannel(format!(
                        "Choi state not PSD: min eigenvalue {min:.3e}"
                    )));
                }
                let tr = choi.trace().re;
                if !self.trace_decreasing && (tr - 1.0).abs() > CHANNEL_TOL {
                    return Err(Error::InvalidChannel(format!(
                        "superoperator is not trace preserving (Choi trace {tr})"
                    )));
                }
            }
            Representation::Choi(m) => {
                if m.nrows() != d * d || m.ncols() != d * d {
                    return Err(Error::DimensionMismatch("Choi dimension mismatch".into()));
                }
                if hermiticity_defect(m) > CHANNEL_TOL {
                    return Err(Error::InvalidChannel("Choi state not Hermitian".into()));
                }
                let (vals, _) = eigh(m);
                let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                if min < -CHANNEL_TOL {
                    return Err(Error::InvalidChannel(format!(
                        "Choi state not PSD: min eigenvalue {min:.3e}"
                    )));
                }
                let tr = m.trace().re;
                if !self.trace_decreasing && (tr - 1.0).abs() > CHANNEL_TOL {
                    return Err(Error::InvalidChannel(format!("Choi trace {tr} != 1")));
                }
            }
        }
        Ok(())
    }

    // ---- constructors for common channels ----

    pub fn identity(dim: usize) -> Self {
        Self::new_unchecked(dim, Representation::Kraus(vec![CMat::identity(dim, dim)]))
    }

    pub fn from_unitary(u: &CMat) -> Result<Self> {
        let d = u.nrows();
        let id = CMat::identity(d, d);
        if max_abs_diff(&(dagger(u) * u), &id) > 1e-9 {
            return Err(Error::InvalidChannel("matrix is not unitary".into()));
        }
        Ok(Self::new_unchecked(d, Representation::Kraus(vec![u.clone()])))
    }

    pub fn from_kraus(dim: usize, ops: Vec<CMat>) -> Result<Self> {
        Self::new(dim, Representation::Kraus(ops))
    }

    // ---- application ----

    /// Apply the channel to a density matrix. When `strict`, the channel is
    /// re-validated first.
    pub fn apply_strict(&self, rho: &DensityMatrix, strict: bool) -> Result<DensityMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "channel dim {} vs state dim {}",
                self.dim,
                rho.dim()
            )));
        }
        if strict {
            self.validate()?;
        }
        let out = self.apply_matrix(rho.matrix());
        Ok(DensityMatrix::new_unchecked(out))
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.apply_strict(rho, false)
    }

    /// Apply to a raw matrix (not necessarily a state).
    pub fn apply_matrix(&self, rho: &CMat) -> CMat {
        match &self.rep {
            Representation::Kraus(ops) => {
                let mut out = CMat::zeros(self.dim, self.dim);
                for a in ops {
                    out += a * rho * dagger(a);
                }
                out
            }
            Representation::Chi(chi) => {
                let mut out = CMat::zeros(self.dim, self.dim);
                for (m, em) in chi.basis.iter().enumerate() {
                    let emm = em.matrix();
                    for (n, en) in chi.basis.iter().enumerate() {
                        let z = chi.mat[(m, n)];
                        if z.norm() < 1e-300 {
                            continue;
                        }
                        out += (&emm * rho * en.matrix()) * z;
                    }
                }
                out
            }
            Representation::Superop(s) => unvec_col(&(s * vec_col(rho)), self.dim),
            Representation::Choi(m) => {
                // E(rho) = D * Tr_1[(rho^T ⊗ I) Choi]
                let d = self.dim;
                let mut out = CMat::zeros(d, d);
                for a in 0..d {
                    for b in 0..d {
                        let mut acc = c(0.0, 0.0);
                        for i in 0..d {
                            for j in 0..d {
                                acc += rho[(i, j)] * m[(i * d + a, j * d + b)];
                            }
                        }
                        out[(a, b)] = acc * cr(d as f64);
                    }
                }
                out
            }
        }
    }

    // ---- representation conversions ----

    pub fn superop_matrix(&self) -> Result<CMat> {
        match &self.rep {
            Representation::Superop(s) => Ok(s.clone()),
            Representation::Kraus(ops) => {
                let d2 = self.dim * self.dim;
                let mut s = CMat::zeros(d2, d2);
                for a in ops {
                    let ac = a.map(|z| z.conj());
                    s += kron(&ac, a);
                }
                Ok(s)
            }
            Representation::Chi(chi) => {
                let d2 = self.dim * self.dim;
                let mut s = CMat::zeros(d2, d2);
                for (m, em) in chi.basis.iter().enumerate() {
                    let emm = em.matrix();
                    for (n, en) in chi.basis.iter().enumerate() {
                        let z = chi.mat[(m, n)];
                        if z.norm() < 1e-300 {
                            continue;
                        }
                        // E_m rho E_n with Hermitian E_n: (E_n)^T = conj(E_n)
                        let enc = en.matrix().map(|w| w.conj());
                        s += kron(&enc, &emm) * z;
                    }
                }
                Ok(s)
            }
            Representation::Choi(_) => {
                // via channel action on matrix units
                let d = self.dim;
                let d2 = d * d;
                let mut s = CMat::zeros(d2, d2);
                for j in 0..d {
                    for i in 0..d {
                        let mut e = CMat::zeros(d, d);
                        e[(i, j)] = cr(1.0);
                        let out = self.apply_matrix(&e);
                        let col = vec_col(&out);
                        s.set_column(j * d + i, &col);
                    }
                }
                Ok(s)
            }
        }
    }

    /// Choi state `(I ⊗ E)(|phi><phi|)`, normalized to unit trace for CPTP
    /// channels.
    pub fn choi_matrix(&self) -> Result<CMat> {
        if let Representation::Choi(m) = &self.rep {
            return Ok(m.clone());
        }
        let d = self.dim;
        let mut choi = CMat::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let mut e = CMat::zeros(d, d);
                e[(i, j)] = cr(1.0);
                let out = self.apply_matrix(&e);
                // block (i, j) of the first factor carries E(e_ij)/D
                for a in 0..d {
                    for b in 0..d {
                        choi[(i * d + a, j * d + b)] += out[(a, b)] / cr(d as f64);
                    }
                }
            }
        }
        Ok(choi)
    }

    pub fn choi_state(&self) -> Result<DensityMatrix> {
        let m = self.choi_matrix()?;
        DensityMatrix::new(m)
    }

    /// Kraus operators extracted from the Choi state; eigenvalues below
    /// 1e-12 are dropped (explicit rank truncation).
    pub fn kraus_operators(&self) -> Result<Vec<CMat>> {
        if let Representation::Kraus(ops) = &self.rep {
            return Ok(ops.clone());
        }
        let d = self.dim;
        let choi = self.choi_matrix()?;
        let herm = (&choi + choi.adjoint()).scale(0.5);
        let (vals, vecs) = eigh(&herm);
        let mut ops = Vec::new();
        for (k, &lam) in vals.iter().enumerate() {
            if lam < 1e-12 {
                continue;
            }
            let v = vecs.column(k);
            let mut a = CMat::zeros(d, d);
            // eigenvector index (i*d + a): i = reference factor, a = output
            for i in 0..d {
                for row in 0..d {
                    a[(row, i)] = v[i * d + row] * cr((d as f64 * lam).sqrt());
                }
            }
            ops.push(a);
        }
        if ops.is_empty() {
            return Err(Error::InvalidChannel("channel has zero Kraus rank".into()));
        }
        Ok(ops)
    }

    /// Process matrix chi in the Pauli basis, via linear inversion of the
    /// superoperator relation.
    pub fn chi_matrix(&self) -> Result<ProcessMatrix> {
        if let Representation::Chi(chi) = &self.rep {
            return Ok(chi.clone());
        }
        let d = self.dim;
        let d2 = d * d;
        let n = (d as f64).log2().round() as usize;
        let basis = pauli_basis(n)?;
        // build the map chi -> superop as a d^4 x d^4 matrix and solve
        let mut m = CMat::zeros(d2 * d2, d2 * d2);
        for (p, ep) in basis.iter().enumerate() {
            let epm = ep.matrix();
            for (q, eq) in basis.iter().enumerate() {
                let eqc = eq.matrix().map(|w| w.conj());
                let block = kron(&eqc, &epm);
                let col = p * d2 + q;
                for (idx, z) in block.iter().enumerate() {
                    m[(idx, col)] += *z;
                }
            }
        }
        let s = self.superop_matrix()?;
        let svec = CVec::from_column_slice(s.as_slice());
        let chivec = solve(&m, &svec)?;
        let mut chi = CMat::zeros(d2, d2);
        for p in 0..d2 {
            for q in 0..d2 {
                chi[(p, q)] = chivec[p * d2 + q];
            }
        }
        ProcessMatrix::new(d, chi)
    }

    /// Same channel re-expressed in another representation.
    pub fn convert_to(&self, tag: &str) -> Result<QuantumChannel> {
        let rep = match tag {
            "kraus" => Representation::Kraus(self.kraus_operators()?),
            "chi" => Representation::Chi(self.chi_matrix()?),
            "superop" => Representation::Superop(self.superop_matrix()?),
            "choi" => Representation::Choi(self.choi_matrix()?),
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown representation tag {other}"
                )))
            }
        };
        Ok(QuantumChannel {
            dim: self.dim,
            rep,
            trace_decreasing: self.trace_decreasing,
        })
    }

    /// Composition `other ∘ self` (self acts first).
    pub fn then(&self, other: &QuantumChannel) -> Result<QuantumChannel> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch("composition dim mismatch".into()));
        }
        let s = other.superop_matrix()? * self.superop_matrix()?;
        Ok(QuantumChannel::new_unchecked(
            self.dim,
            Representation::Superop(s),
        ))
    }
}

/// Depolarizing channel. For one qubit
/// `E(rho) = (1-p) rho + (p/3)(X rho X + Y rho Y + Z rho Z)`; for n qubits the
/// non-identity Pauli terms share total weight `p` uniformly.
pub fn depolarizing_channel(p: f64, n: usize) -> Result<QuantumChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "depolarizing probability {p} outside [0,1]"
        )));
    }
    let basis = pauli_basis(n)?;
    let dim = 1 << n;
    let k = basis.len() - 1;
    let mut ops = Vec::with_capacity(basis.len());
    for (idx, pauli) in basis.iter().enumerate() {
        let w = if idx == 0 { 1.0 - p } else { p / k as f64 };
        if w == 0.0 {
            continue;
        }
        ops.push(pauli.matrix().scale(w.sqrt()));
    }
    QuantumChannel::from_kraus(dim, ops)
}

/// Uhlmann fidelity `F = ||sqrt(rho) sqrt(sigma)||_1`, bounded in `[0, 1]`.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(
            "fidelity arguments differ in dimension".into(),
        ));
    }
    let a = sqrtm_psd(rho.matrix());
    let b = sqrtm_psd(sigma.matrix());
    Ok(trace_norm(&(a * b)).min(1.0))
}

/// Process fidelity: Uhlmann fidelity of the two Choi states.
pub fn process_fidelity(ch1: &QuantumChannel, ch2: &QuantumChannel) -> Result<f64> {
    if ch1.dim != ch2.dim {
        return Err(Error::DimensionMismatch(
            "process fidelity dim mismatch".into(),
        ));
    }
    let r1 = DensityMatrix::new_unchecked(ch1.choi_matrix()?);
    let r2 = DensityMatrix::new_unchecked(ch2.choi_matrix()?);
    uhlmann_fidelity(&r1, &r2)
}

/// Average gate fidelity of the depolarizing map with survival weight `p`
/// relative to the identity: `p + (1-p)/D`.
pub fn avg_gate_fidelity_depolarizing(p: f64, dim: usize) -> f64 {
    p + (1.0 - p) / dim as f64
}

/// The four Bell projectors in the order `Phi+, Psi+, Psi-, Phi-`
/// (matching the error assignments I, X, Y, Z on the first qubit).
pub fn bell_projectors() -> Vec<CMat> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mk = |a: usize, b: usize, sign: f64| {
        let mut v = CVec::zeros(4);
        v[a] = cr(s);
        v[b] = cr(sign * s);
        &v * v.adjoint()
    };
    vec![
        mk(0, 3, 1.0),  // Phi+
        mk(1, 2, 1.0),  // Psi+
        mk(1, 2, -1.0), // Psi-
        mk(0, 3, -1.0), // Phi-
    ]
}

/// Maximally entangled state |phi> = (1/sqrt(D)) sum_i |i>|i>.
pub fn max_entangled_state(d: usize) -> CVec {
    let mut v = CVec::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = cr(1.0 / (d as f64).sqrt());
    }
    v
}

/// Condition-number guard used by tomography workspaces.
pub fn check_conditioning(m: &CMat, limit: f64, what: &str) -> Result<()> {
    let k = condition_number(m);
    if !k.is_finite() || k > limit {
        return Err(Error::IllConditioned(format!(
            "{what}: condition number {k:.3e} exceeds {limit:.1e}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I1;
    use crate::pauli::PauliOp;

    fn x_unitary() -> QuantumChannel {
        QuantumChannel::from_unitary(&PauliOp::X.matrix()).unwrap()
    }

    #[test]
    fn identity_channel_fixes_states() {
        let ch = QuantumChannel::identity(2);
        let rho = crate::state::BlochState::pure(0.7, 1.3).density();
        let out = ch.apply(&rho).unwrap();
        assert!(max_abs_diff(out.matrix(), rho.matrix()) < 1e-14);
    }

    #[test]
    fn fully_depolarizing_sends_everything_to_mixed() {
        // p = 3/4 in the Pauli-mixture form is the fully depolarizing map
        let ch = depolarizing_channel(0.75, 1).unwrap();
        for (theta, phi) in [(0.0, 0.0), (std::f64::consts::FRAC_PI_2, 0.0), (2.2, -1.0), (0.9, 2.5)] {
            let rho = crate::state::BlochState::pure(theta, phi).density();
            let out = ch.apply(&rho).unwrap();
            let v = out.bloch().unwrap();
            assert!(v.norm() < 1e-12, "residual polarization {}", v.norm());
        }
    }

    #[test]
    fn depolarizing_p1_z_expectation() {
        // E(|0><0|) = (1/3)(X rho X + Y rho Y + Z rho Z) has <Z> = -1/3
        let ch = depolarizing_channel(1.0, 1).unwrap();
        let rho = DensityMatrix::computational(2, 0);
        let out = ch.apply(&rho).unwrap();
        let z = out.expect(&PauliOp::Z.matrix());
        assert!((z + 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn chi_diag_identity_acts_trivially() {
        let mut chi = CMat::zeros(4, 4);
        chi[(0, 0)] = cr(1.0);
        let pm = ProcessMatrix::new(2, chi).unwrap();
        let ch = QuantumChannel::new(2, Representation::Chi(pm)).unwrap();
        for b in [
            crate::state::BlochState::ground(),
            crate::state::BlochState::excited(),
            crate::state::BlochState::plus(),
            crate::state::BlochState::pure(
                std::f64::consts::FRAC_PI_2,
                std::f64::consts::FRAC_PI_2,
            ),
        ] {
            let rho = b.density();
            let out = ch.apply(&rho).unwrap();
            assert!(max_abs_diff(out.matrix(), rho.matrix()) < 1e-12);
        }
    }

    #[test]
    fn choi_of_identity_is_max_entangled() {
        let ch = QuantumChannel::identity(2);
        let choi = ch.choi_matrix().unwrap();
        let phi = max_entangled_state(2);
        let expect = &phi * phi.adjoint();
        assert!(max_abs_diff(&choi, &expect) < 1e-14);
    }

    #[test]
    fn choi_of_fully_depolarizing_is_maximally_mixed() {
        let ch = depolarizing_channel(0.75, 1).unwrap();
        let choi = ch.choi_matrix().unwrap();
        let expect = CMat::identity(4, 4).scale(0.25);
        assert!(max_abs_diff(&choi, &expect) < 1e-14);
    }

    #[test]
    fn choi_of_x_is_psi_plus() {
        let choi = x_unitary().choi_matrix().unwrap();
        // (I ⊗ X)|phi> = (|01> + |10>)/sqrt(2)
        let mut v = CVec::zeros(4);
        v[1] = cr(std::f64::consts::FRAC_1_SQRT_2);
        v[2] = cr(std::f64::consts::FRAC_1_SQRT_2);
        let expect = &v * v.adjoint();
        assert!(max_abs_diff(&choi, &expect) < 1e-14);
    }

    #[test]
    fn uhlmann_basic_values() {
        let zero = DensityMatrix::computational(2, 0);
        let one = DensityMatrix::computational(2, 1);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((uhlmann_fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!(uhlmann_fidelity(&zero, &one).unwrap() < 1e-10);
        let f = uhlmann_fidelity(&zero, &mixed).unwrap();
        assert!((f - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn uhlmann_symmetric() {
        let a = crate::state::BlochState::pure(0.4, 0.9).density();
        let b = DensityMatrix::new(
            CMat::from_row_slice(2, 2, &[cr(0.7), c(0.1, 0.05), c(0.1, -0.05), cr(0.3)]),
        )
        .unwrap();
        let f1 = uhlmann_fidelity(&a, &b).unwrap();
        let f2 = uhlmann_fidelity(&b, &a).unwrap();
        assert!((f1 - f2).abs() < 1e-10);
    }

    #[test]
    fn process_fidelity_identity_vs_x_is_zero() {
        let id = QuantumChannel::identity(2);
        let x = x_unitary();
        assert!((process_fidelity(&id, &id).unwrap() - 1.0).abs() < 1e-12);
        assert!(process_fidelity(&id, &x).unwrap() < 1e-7);
    }

    #[test]
    fn avg_gate_fidelity_values() {
        assert!((avg_gate_fidelity_depolarizing(1.0, 2) - 1.0).abs() < 1e-15);
        assert!((avg_gate_fidelity_depolarizing(0.0, 2) - 0.5).abs() < 1e-15);
        assert!((avg_gate_fidelity_depolarizing(0.9948, 2) - 0.9974).abs() < 1e-12);
    }

    #[test]
    fn representation_roundtrip_preserves_action() {
        // a non-trivial CPTP map: rotation composed with amplitude damping
        let g = 0.3f64;
        let a0 = CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr((1.0 - g).sqrt())]);
        let a1 = CMat::from_row_slice(2, 2, &[cr(0.0), cr(g.sqrt()), cr(0.0), cr(0.0)]);
        let th: f64 = 0.77;
        let u = CMat::from_row_slice(
            2,
            2,
            &[
                cr((th / 2.0).cos()),
                cr(-(th / 2.0).sin()),
                cr((th / 2.0).sin()),
                cr((th / 2.0).cos()),
            ],
        );
        let damp = QuantumChannel::from_kraus(2, vec![a0, a1]).unwrap();
        let rot = QuantumChannel::from_unitary(&u).unwrap();
        let ch = rot.then(&damp).unwrap();

        let chain = ch
            .convert_to("chi")
            .unwrap()
            .convert_to("superop")
            .unwrap()
            .convert_to("choi")
            .unwrap()
            .convert_to("kraus")
            .unwrap();
        let rho = crate::state::BlochState::pure(1.0, 0.3).density();
        let out1 = ch.apply(&rho).unwrap();
        let out2 = chain.apply(&rho).unwrap();
        assert!(max_abs_diff(out1.matrix(), out2.matrix()) < 1e-10);
    }

    #[test]
    fn transpose_map_fails_cp_check() {
        // transpose is positive but not completely positive: Choi has a
        // negative eigenvalue
        let d = 2;
        let mut s = CMat::zeros(4, 4);
        // vec_col(rho^T) = swap of vec indices
        for i in 0..d {
            for j in 0..d {
                s[(j * d + i, i * d + j)] = cr(1.0);
            }
        }
        assert!(QuantumChannel::new(2, Representation::Superop(s)).is_err());
    }

    #[test]
    fn phase_kraus_sign_conventions() {
        // S gate should produce chi with off-diagonal between I and Z
        let s_gate = CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), I1]);
        let ch = QuantumChannel::from_unitary(&s_gate).unwrap();
        let chi = ch.chi_matrix().unwrap();
        assert!((chi.mat[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((chi.mat[(3, 3)].re - 0.5).abs() < 1e-12);
        assert!((chi.mat[(0, 3)] - c(0.0, 0.5)).norm() < 1e-12);
        assert!(chi.trace_preservation_defect() < 1e-10);
    }
}
