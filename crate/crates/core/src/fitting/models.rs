//! Fit model functions and their analytic gradients.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The model families the fit engine knows about.
///
/// * `DbFid`: `F(t) = (1+a)/2 + (1-a)/2 * exp(-t/T_D) cos(2 w t)`,
///   parameters `[a, T_D, w]`.
/// * `DbFidSpam`: `F(t) = B + A exp(-t/T_D) cos(2 w t)`,
///   parameters `[A, B, T_D, w]` (the four-parameter generalization).
/// * `RbExp`: `P(m) = A p^m + B`, parameters `[A, p, B]`.
/// * `RbFirstOrder`: `P(m) = A1 p^m + B1 + C1 (m-1)(q - p^2) p^{m-2}`,
///   parameters `[A1, B1, C1, p, q]`.
/// * `RcsExp`: `F(P) = A exp(-lambda P)`, parameters `[A, lambda]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    DbFid,
    DbFidSpam,
    RbExp,
    RbFirstOrder,
    RcsExp,
}

impl ModelKind {
    pub fn n_params(self) -> usize {
        match self {
            ModelKind::DbFid => 3,
            ModelKind::DbFidSpam => 4,
            ModelKind::RbExp => 3,
            ModelKind::RbFirstOrder => 5,
            ModelKind::RcsExp => 2,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::DbFid => &["a", "t_d", "omega"],
            ModelKind::DbFidSpam => &["amp", "offset", "t_d", "omega"],
            ModelKind::RbExp => &["amp", "p", "offset"],
            ModelKind::RbFirstOrder => &["amp", "offset", "c1", "p", "q"],
            ModelKind::RcsExp => &["amp", "lambda"],
        }
    }

    /// Model value at `x` with parameters `theta`.
    pub fn value(self, x: f64, theta: &[f64]) -> f64 {
        match self {
            ModelKind::DbFid => {
                let (a, td, w) = (theta[0], theta[1], theta[2]);
                0.5 * (1.0 + a) + 0.5 * (1.0 - a) * (-x / td).exp() * (2.0 * w * x).cos()
            }
            ModelKind::DbFidSpam => {
                let (amp, b, td, w) = (theta[0], theta[1], theta[2], theta[3]);
                b + amp * (-x / td).exp() * (2.0 * w * x).cos()
            }
            ModelKind::RbExp => {
                let (a, p, b) = (theta[0], theta[1], theta[2]);
                a * p.powf(x) + b
            }
            ModelKind::RbFirstOrder => {
                let (a1, b1, c1, p, q) = (theta[0], theta[1], theta[2], theta[3], theta[4]);
                a1 * p.powf(x) + b1 + c1 * (x - 1.0) * (q - p * p) * p.powf(x - 2.0)
            }
            ModelKind::RcsExp => {
                let (a, lam) = (theta[0], theta[1]);
                a * (-lam * x).exp()
            }
        }
    }

    /// Analytic gradient of the model value with respect to `theta`.
    pub fn gradient(self, x: f64, theta: &[f64], out: &mut [f64]) {
        match self {
            ModelKind::DbFid => {
                let (_, td, w) = (theta[0], theta[1], theta[2]);
                let e = (-x / td).exp();
                let cosw = (2.0 * w * x).cos();
                let sinw = (2.0 * w * x).sin();
                let a = theta[0];
                out[0] = 0.5 - 0.5 * e * cosw;
                out[1] = 0.5 * (1.0 - a) * e * cosw * x / (td * td);
                out[2] = -0.5 * (1.0 - a) * e * sinw * 2.0 * x;
            }
            ModelKind::DbFidSpam => {
                let (amp, _, td, w) = (theta[0], theta[1], theta[2], theta[3]);
                let e = (-x / td).exp();
                let cosw = (2.0 * w * x).cos();
                let sinw = (2.0 * w * x).sin();
                out[0] = e * cosw;
                out[1] = 1.0;
                out[2] = amp * e * cosw * x / (td * td);
                out[3] = -amp * e * sinw * 2.0 * x;
            }
            ModelKind::RbExp => {
                let (a, p, _) = (theta[0], theta[1], theta[2]);
                out[0] = p.powf(x);
                out[1] = if x == 0.0 { 0.0 } else { a * x * p.powf(x - 1.0) };
                out[2] = 1.0;
            }
            ModelKind::RbFirstOrder => {
                let (a1, _, c1, p, q) = (theta[0], theta[1], theta[2], theta[3], theta[4]);
                out[0] = p.powf(x);
                out[1] = 1.0;
                out[2] = (x - 1.0) * (q - p * p) * p.powf(x - 2.0);
                let dp_main = if x == 0.0 { 0.0 } else { a1 * x * p.powf(x - 1.0) };
                let dp_corr = c1 * (x - 1.0)
                    * (-2.0 * p * p.powf(x - 2.0)
                        + (q - p * p)
                            * if x == 2.0 { 0.0 } else { (x - 2.0) * p.powf(x - 3.0) });
                out[3] = dp_main + dp_corr;
                out[4] = c1 * (x - 1.0) * p.powf(x - 2.0);
            }
            ModelKind::RcsExp => {
                let (a, lam) = (theta[0], theta[1]);
                let e = (-lam * x).exp();
                out[0] = e;
                out[1] = -a * x * e;
            }
        }
    }

    /// Default parameter bounds (lower, upper) per parameter.
    pub fn default_bounds(self) -> Vec<(f64, f64)> {
        let inf = f64::INFINITY;
        match self {
            ModelKind::DbFid => vec![(-1.0, 1.0), (1e-12, inf), (0.0, inf)],
            ModelKind::DbFidSpam => {
                vec![(-1.0, 1.0), (-1.0, 2.0), (1e-12, inf), (0.0, inf)]
            }
            ModelKind::RbExp => vec![(-1.0, 1.0), (1e-12, 1.0), (-1.0, 2.0)],
            ModelKind::RbFirstOrder => vec![
                (-1.0, 1.0),
                (-1.0, 2.0),
                (-10.0, 10.0),
                (1e-12, 1.0),
                (0.0, 1.0),
            ],
            ModelKind::RcsExp => vec![(0.0, 2.0), (0.0, inf)],
        }
    }
}

/// A model plus optional bounds and a fixed-parameter mask.
#[derive(Debug, Clone)]
pub struct FitModel {
    pub kind: ModelKind,
    pub bounds: Vec<(f64, f64)>,
    /// Parameters marked `true` are held at their initial value.
    pub fixed: Vec<bool>,
}

impl FitModel {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            bounds: kind.default_bounds(),
            fixed: vec![false; kind.n_params()],
        }
    }

    pub fn with_fixed(mut self, index: usize, fixed: bool) -> Self {
        self.fixed[index] = fixed;
        self
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.len() != self.kind.n_params() {
            return Err(Error::InvalidParameter("bounds length mismatch".into()));
        }
        self.bounds = bounds;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Analytic gradients match central finite differences on random points.
    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = crate::rng::seeded(31);
        for kind in [
            ModelKind::DbFid,
            ModelKind::DbFidSpam,
            ModelKind::RbExp,
            ModelKind::RbFirstOrder,
            ModelKind::RcsExp,
        ] {
            for _ in 0..40 {
                let np = kind.n_params();
                let mut theta: Vec<f64> = (0..np).map(|_| rng.gen_range(0.1..0.9)).collect();
                // keep decay-time-like parameters away from zero
                if kind == ModelKind::DbFid {
                    theta[1] = rng.gen_range(0.5..5.0);
                }
                if kind == ModelKind::DbFidSpam {
                    theta[2] = rng.gen_range(0.5..5.0);
                }
                let x = rng.gen_range(3.0..40.0f64).round();
                let mut grad = vec![0.0; np];
                kind.gradient(x, &theta, &mut grad);
                // deviations measured against the gradient-vector scale:
                // near-zero components sit below the central-difference
                // cancellation noise and cannot be compared relatively
                let scale = grad.iter().map(|g| g.abs()).fold(1e-9, f64::max);
                for i in 0..np {
                    let h = 1e-6 * theta[i].abs().max(1e-3);
                    let mut tp = theta.clone();
                    tp[i] += h;
                    let mut tm = theta.clone();
                    tm[i] -= h;
                    let fd = (kind.value(x, &tp) - kind.value(x, &tm)) / (2.0 * h);
                    assert!(
                        (grad[i] - fd).abs() / scale < 1e-6,
                        "{kind:?} param {i}: analytic {} vs fd {fd}",
                        grad[i]
                    );
                }
            }
        }
    }

    #[test]
    fn first_order_reduces_to_plain_exponential() {
        // q = p^2 kills the correction term, as does C1 = 0
        let x = 7.0;
        let p = 0.97;
        let plain = ModelKind::RbExp.value(x, &[0.5, p, 0.5]);
        let with_q = ModelKind::RbFirstOrder.value(x, &[0.5, 0.5, 3.0, p, p * p]);
        let with_c0 = ModelKind::RbFirstOrder.value(x, &[0.5, 0.5, 0.0, p, 0.77]);
        assert!((plain - with_q).abs() < 1e-14);
        assert!((plain - with_c0).abs() < 1e-14);
    }
}
