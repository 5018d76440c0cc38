//! Dense complex linear algebra helpers used throughout the toolkit.
//!
//! All matrices are `nalgebra` dynamic matrices over `Complex<f64>` (aliased
//! `CMat`) or `f64` (`RMat`). Conventions fixed here and relied on everywhere
//! else:
//!
//! * vectorization is column-stacking: `vec(A rho B) = (B^T ⊗ A) vec(rho)`;
//! * matrix square roots and trace norms go through Hermitian
//!   eigen-decompositions with negative eigenvalues clamped to zero.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;

pub const I1: C64 = Complex::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

/// Conjugate transpose.
pub fn dagger(a: &CMat) -> CMat {
    a.adjoint()
}

/// Kronecker product.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Column-stacking vectorization.
pub fn vec_col(a: &CMat) -> CVec {
    CVec::from_column_slice(a.as_slice())
}

/// Inverse of [`vec_col`] for a square matrix of dimension `d`.
pub fn unvec_col(v: &CVec, d: usize) -> CMat {
    CMat::from_column_slice(d, d, v.as_slice())
}

/// Maximum elementwise modulus of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Maximum elementwise deviation from Hermiticity, `max |A - A†|`.
pub fn hermiticity_defect(a: &CMat) -> f64 {
    max_abs_diff(a, &a.adjoint())
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns,
/// sorted by descending eigenvalue.
pub fn eigh(a: &CMat) -> (Vec<f64>, CMat) {
    let se = a.clone().symmetric_eigen();
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[j].partial_cmp(&se.eigenvalues[i]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Positive-semidefinite square root of a Hermitian matrix.
///
/// Eigenvalues below zero (numerical noise) are clamped to zero so the root
/// never produces NaN.
pub fn sqrtm_psd(a: &CMat) -> CMat {
    let (vals, vecs) = eigh(a);
    let n = a.nrows();
    let mut d = CMat::zeros(n, n);
    for (i, &v) in vals.iter().enumerate() {
        d[(i, i)] = cr(v.max(0.0).sqrt());
    }
    &vecs * d * vecs.adjoint()
}

/// Trace norm `||A||_1 = sum of singular values`.
pub fn trace_norm(a: &CMat) -> f64 {
    let svd = a.clone().svd(false, false);
    svd.singular_values.iter().sum()
}

/// Spectral norm `||A||_2` (largest singular value).
pub fn spectral_norm(a: &CMat) -> f64 {
    let svd = a.clone().svd(false, false);
    svd.singular_values.iter().cloned().fold(0.0, f64::max)
}

/// Spectral norm of a real matrix.
pub fn spectral_norm_real(a: &RMat) -> f64 {
    let svd = a.clone().svd(false, false);
    svd.singular_values.iter().cloned().fold(0.0, f64::max)
}

/// 2-norm condition number estimate via SVD.
pub fn condition_number(a: &CMat) -> f64 {
    let svd = a.clone().svd(false, false);
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let min = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Project a (nearly) Hermitian matrix onto the PSD cone: Hermitize,
/// clip negative eigenvalues at zero. If `renormalize_trace` is set, rescale
/// so the trace matches the input's real trace.
pub fn project_psd(a: &CMat, renormalize_trace: bool) -> CMat {
    let herm = (a + a.adjoint()).scale(0.5);
    let target = herm.trace().re;
    let (vals, vecs) = eigh(&herm);
    let n = a.nrows();
    let mut d = CMat::zeros(n, n);
    for (i, &v) in vals.iter().enumerate() {
        d[(i, i)] = cr(v.max(0.0));
    }
    let clipped = &vecs * d * vecs.adjoint();
    if renormalize_trace {
        let t = clipped.trace().re;
        if t > 0.0 && target > 0.0 {
            return clipped.scale(target / t);
        }
    }
    clipped
}

/// Solve `A x = b` for complex square `A` by LU with partial pivoting.
pub fn solve(a: &CMat, b: &CVec) -> crate::Result<CVec> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| crate::Error::IllConditioned("singular matrix in linear solve".into()))
}

/// Eigenvalues and (right) eigenvectors of a real 3x3 matrix, allowing
/// complex pairs. Returns `(lambda, S)` with eigenvectors as the columns of
/// `S`, so `G S = S diag(lambda)` up to numerical error.
pub fn eig3_real(g: &RMat) -> crate::Result<(Vec<C64>, CMat)> {
    assert_eq!(g.nrows(), 3);
    let vals = g.complex_eigenvalues();
    let gc = CMat::from_fn(3, 3, |i, j| cr(g[(i, j)]));
    let mut vecs = CMat::zeros(3, 3);
    for k in 0..3 {
        let v = nullvec3(&(gc.clone() - CMat::identity(3, 3) * vals[k]))?;
        vecs.set_column(k, &v);
    }
    Ok((vals.iter().cloned().collect(), vecs))
}

/// Unit null vector of a (numerically) rank-2 complex 3x3 matrix, found as
/// the cross product of its two most independent rows.
fn nullvec3(m: &CMat) -> crate::Result<CVec> {
    let rows: Vec<CVec> = (0..3).map(|i| m.row(i).transpose()).collect();
    let cross = |a: &CVec, b: &CVec| -> CVec {
        CVec::from_vec(vec![
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ])
    };
    let mut best: Option<CVec> = None;
    let mut best_norm = 0.0;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let v = cross(&rows[i], &rows[j]);
            let n = v.norm();
            if n > best_norm {
                best_norm = n;
                best = Some(v);
            }
        }
    }
    match best {
        Some(v) if best_norm > 1e-14 => Ok(v.scale(1.0 / best_norm)),
        _ => Err(crate::Error::IllConditioned(
            "defective or near-defective 3x3 eigenproblem".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrtm_squares_back() {
        let a = CMat::from_row_slice(2, 2, &[cr(2.0), c(0.3, 0.1), c(0.3, -0.1), cr(1.0)]);
        let r = sqrtm_psd(&a);
        assert!(max_abs_diff(&(&r * &r), &a) < 1e-12);
    }

    #[test]
    fn vec_unvec_roundtrip() {
        let a = CMat::from_row_slice(2, 2, &[cr(1.0), c(2.0, 1.0), c(3.0, -1.0), cr(4.0)]);
        let v = vec_col(&a);
        // column stacking: first two entries are the first column
        assert_eq!(v[0], cr(1.0));
        assert_eq!(v[1], c(3.0, -1.0));
        assert!(max_abs_diff(&unvec_col(&v, 2), &a) < 1e-15);
    }

    #[test]
    fn eig3_rotation_plus_decay() {
        // generator with a complex pair +-i and a real eigenvalue -0.5
        let g = RMat::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -0.5]);
        let (vals, vecs) = eig3_real(&g).unwrap();
        let gc = CMat::from_fn(3, 3, |i, j| cr(g[(i, j)]));
        for (k, &lambda) in vals.iter().enumerate() {
            let v = vecs.column(k).clone_owned();
            let lhs = &gc * &v;
            let rhs = v * lambda;
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn psd_projection_clips() {
        let a = CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-0.25)]);
        let p = project_psd(&a, false);
        let (vals, _) = eigh(&p);
        assert!(vals.iter().all(|&v| v >= -1e-14));
    }
}
