//! Damped Gauss-Newton least squares with analytic Jacobians.
//!
//! Minimizes `sum_i w_i (y_i - f(x_i; theta))^2` with a Levenberg-style
//! damping schedule (x10 on rejection, /10 on acceptance), box projection
//! onto parameter bounds, and a fixed-parameter mask. Deterministic given
//! its inputs.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::models::FitModel;
use crate::{Error, Result};

pub const MAX_ITERATIONS: usize = 500;
pub const RELATIVE_COST_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Converged,
    MaxIterations,
    Failed,
}

/// Result of a nonlinear fit: parameters, 1-sigma uncertainties from the
/// Jacobian-based covariance, residual diagnostics and the initialization
/// that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub parameters: Vec<f64>,
    pub uncertainties: Vec<f64>,
    pub residual_rms: f64,
    pub cost: f64,
    pub status: FitStatus,
    pub iterations: usize,
    pub initial_parameters: Vec<f64>,
}

impl FitResult {
    pub fn converged(&self) -> bool {
        self.status == FitStatus::Converged
    }
}

fn project(theta: &mut [f64], model: &FitModel) {
    for (t, (lo, hi)) in theta.iter_mut().zip(&model.bounds) {
        *t = t.clamp(*lo, *hi);
    }
}

fn cost_of(model: &FitModel, x: &[f64], y: &[f64], w: &[f64], theta: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .zip(w)
        .map(|((&xi, &yi), &wi)| {
            let r = yi - model.kind.value(xi, theta);
            wi * r * r
        })
        .sum()
}

/// Weighted nonlinear least squares. Weights are inverse variances; pass
/// `None` for unit weights (exact-mode data). Uncertainties follow the
/// covariance `(J^T W J)^{-1}`, scaled by the reduced chi-square when unit
/// weights are used.
pub fn fit(
    model: &FitModel,
    x: &[f64],
    y: &[f64],
    weights: Option<&[f64]>,
    initial: &[f64],
) -> Result<FitResult> {
    let np = model.kind.n_params();
    if initial.len() != np {
        return Err(Error::InvalidParameter(format!(
            "expected {np} initial parameters, got {}",
            initial.len()
        )));
    }
    if x.len() != y.len() {
        return Err(Error::InvalidParameter("x/y length mismatch".into()));
    }
    let free: Vec<usize> = (0..np).filter(|&i| !model.fixed[i]).collect();
    if x.len() < free.len() + 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least {} points for {} free parameters",
            free.len() + 2,
            free.len()
        )));
    }
    let unit_weights = weights.is_none();
    let w: Vec<f64> = match weights {
        Some(ws) => {
            if ws.len() != x.len() {
                return Err(Error::InvalidParameter("weights length mismatch".into()));
            }
            ws.to_vec()
        }
        None => vec![1.0; x.len()],
    };

    let mut theta = initial.to_vec();
    project(&mut theta, model);
    let mut cost = cost_of(model, x, y, &w, &theta);
    let mut lambda = 1e-6;
    let mut status = FitStatus::MaxIterations;
    let mut iterations = 0;

    let mut grad_full = vec![0.0; np];
    for it in 0..MAX_ITERATIONS {
        iterations = it + 1;
        // gradient over all free parameters, to detect bound pinning
        let mut jtr_full = vec![0.0; np];
        for ((&xi, &yi), &wi) in x.iter().zip(y).zip(&w) {
            let r = yi - model.kind.value(xi, &theta);
            model.kind.gradient(xi, &theta, &mut grad_full);
            for &ia in &free {
                jtr_full[ia] += wi * grad_full[ia] * r;
            }
        }
        // parameters sitting on a bound with the descent direction pointing
        // outward are frozen for this iteration (active set)
        let active: Vec<usize> = free
            .iter()
            .copied()
            .filter(|&ia| {
                let (lo, hi) = model.bounds[ia];
                let at_lo = theta[ia] <= lo && jtr_full[ia] < 0.0;
                let at_hi = theta[ia] >= hi && jtr_full[ia] > 0.0;
                !(at_lo || at_hi)
            })
            .collect();
        if active.is_empty() {
            status = FitStatus::Converged;
            break;
        }
        let na = active.len();
        let mut jtj = DMatrix::<f64>::zeros(na, na);
        let mut jtr = DVector::<f64>::zeros(na);
        for ((&xi, &yi), &wi) in x.iter().zip(y).zip(&w) {
            let r = yi - model.kind.value(xi, &theta);
            model.kind.gradient(xi, &theta, &mut grad_full);
            for (a, &ia) in active.iter().enumerate() {
                jtr[a] += wi * grad_full[ia] * r;
                for (b, &ib) in active.iter().enumerate() {
                    jtj[(a, b)] += wi * grad_full[ia] * grad_full[ib];
                }
            }
        }

        let mut accepted = false;
        for _ in 0..16 {
            let mut damped = jtj.clone();
            for d in 0..na {
                damped[(d, d)] += lambda * jtj[(d, d)].max(1e-30);
            }
            let Some(step) = damped.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = theta.clone();
            for (a, &ia) in active.iter().enumerate() {
                trial[ia] += step[a];
            }
            project(&mut trial, model);
            let trial_cost = cost_of(model, x, y, &w, &trial);
            if trial_cost.is_finite() && trial_cost <= cost {
                let rel = (cost - trial_cost) / cost.max(1e-300);
                let moved: f64 = trial
                    .iter()
                    .zip(&theta)
                    .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
                    .fold(0.0, f64::max);
                theta = trial;
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-14);
                accepted = true;
                if rel < RELATIVE_COST_TOL || moved < 1e-13 {
                    status = FitStatus::Converged;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // damping escalation exhausted; declare convergence when the
            // per-coordinate Newton steps are negligible relative to the
            // parameter scale (robust to weight magnitudes)
            let newton_small = (0..na).all(|a| {
                let scale = jtj[(a, a)].max(1e-300) * (1.0 + theta[active[a]].abs());
                jtr[a].abs() <= 1e-8 * scale
            });
            status = if newton_small {
                FitStatus::Converged
            } else {
                FitStatus::Failed
            };
            break;
        }
        if status == FitStatus::Converged {
            break;
        }
    }

    // covariance from the final Jacobian
    let nf = free.len();
    let mut jtj = DMatrix::<f64>::zeros(nf, nf);
    for (&xi, &wi) in x.iter().zip(&w) {
        model.kind.gradient(xi, &theta, &mut grad_full);
        for (a, &ia) in free.iter().enumerate() {
            for (b, &ib) in free.iter().enumerate() {
                jtj[(a, b)] += wi * grad_full[ia] * grad_full[ib];
            }
        }
    }
    let dof = (x.len() as f64 - nf as f64).max(1.0);
    let scale = if unit_weights { cost / dof } else { 1.0 };
    let mut uncertainties = vec![0.0; np];
    if let Some(cov) = jtj.clone().lu().try_inverse() {
        for (a, &ia) in free.iter().enumerate() {
            uncertainties[ia] = (cov[(a, a)].max(0.0) * scale).sqrt();
        }
    } else {
        for &ia in &free {
            uncertainties[ia] = f64::NAN;
        }
    }

    let rms = (cost / x.len() as f64).sqrt();
    Ok(FitResult {
        parameters: theta,
        uncertainties,
        residual_rms: rms,
        cost,
        status,
        iterations,
        initial_parameters: initial.to_vec(),
    })
}

/// Fit with several starting points, keeping the lowest-cost converged
/// result (or the lowest-cost result overall when none converge).
pub fn fit_multi_start(
    model: &FitModel,
    x: &[f64],
    y: &[f64],
    weights: Option<&[f64]>,
    starts: &[Vec<f64>],
) -> Result<FitResult> {
    if starts.is_empty() {
        return Err(Error::InvalidParameter("no starting points".into()));
    }
    let mut best: Option<FitResult> = None;
    for s in starts {
        let r = fit(model, x, y, weights, s)?;
        let better = match &best {
            None => true,
            Some(b) => {
                (r.converged() && !b.converged()) || (r.converged() == b.converged() && r.cost < b.cost)
            }
        };
        if better {
            best = Some(r);
        }
    }
    Ok(best.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::models::ModelKind;

    #[test]
    fn exact_data_exact_start_is_fixed_point() {
        let model = FitModel::new(ModelKind::RbExp);
        let theta = [0.5, 0.99, 0.5];
        let x: Vec<f64> = (0..40).map(|i| (i * 5) as f64).collect();
        let y: Vec<f64> = x.iter().map(|&m| ModelKind::RbExp.value(m, &theta)).collect();
        let r = fit(&model, &x, &y, None, &theta).unwrap();
        assert!(r.converged());
        assert!(r.cost < 1e-24);
        for (a, b) in r.parameters.iter().zip(&theta) {
            assert!((a - b).abs() < 1e-9);
        }
        // refitting from the result moves parameters by < 1e-8
        let r2 = fit(&model, &x, &y, None, &r.parameters).unwrap();
        for (a, b) in r2.parameters.iter().zip(&r.parameters) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn rb_recovery_with_noise() {
        // A = 0.5, p = 0.99, B = 0.5 with 1% Gaussian-ish noise
        let truth = [0.5, 0.99, 0.5];
        let x: Vec<f64> = (0..30).map(|i| (i * 10) as f64).collect();
        let mut rng = crate::rng::seeded(77);
        use rand::Rng;
        let y: Vec<f64> = x
            .iter()
            .map(|&m| ModelKind::RbExp.value(m, &truth) + rng.gen_range(-0.01..0.01))
            .collect();
        let model = FitModel::new(ModelKind::RbExp);
        let r = fit(&model, &x, &y, None, &[0.4, 0.95, 0.45]).unwrap();
        assert!(r.converged());
        for (i, (&fitted, &expected)) in r.parameters.iter().zip(&truth).enumerate() {
            let sigma = r.uncertainties[i].max(1e-4);
            assert!(
                (fitted - expected).abs() < 5.0 * sigma,
                "param {i}: {fitted} vs {expected} (sigma {sigma})"
            );
        }
    }

    #[test]
    fn fixed_mask_pins_parameter() {
        let model = FitModel::new(ModelKind::DbFid).with_fixed(2, true);
        let x: Vec<f64> = (1..40).map(|i| i as f64).collect();
        let truth = [-0.9, 20.0, 0.0];
        let y: Vec<f64> = x.iter().map(|&t| ModelKind::DbFid.value(t, &truth)).collect();
        let r = fit(&model, &x, &y, None, &[-0.5, 10.0, 0.0]).unwrap();
        assert_eq!(r.parameters[2], 0.0);
        assert!((r.parameters[0] - truth[0]).abs() < 1e-6);
        assert!((r.parameters[1] - truth[1]).abs() < 1e-4);
    }

    #[test]
    fn scale_equivariance() {
        // rescaling x by c and rate-like parameters by 1/c leaves residuals
        // unchanged
        let model = FitModel::new(ModelKind::DbFid);
        let truth = [0.02, 30.0, 0.8];
        let x: Vec<f64> = (1..60).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|&t| ModelKind::DbFid.value(t, &truth)).collect();
        let r1 = fit(&model, &x, &y, None, &[0.0, 20.0, 0.7]).unwrap();
        let c = 3.0;
        let xs: Vec<f64> = x.iter().map(|&t| t * c).collect();
        let r2 = fit(
            &model,
            &xs,
            &y,
            None,
            &[0.0, 20.0 * c, 0.7 / c],
        )
        .unwrap();
        assert!((r1.residual_rms - r2.residual_rms).abs() < 1e-10);
        assert!((r1.parameters[1] * c - r2.parameters[1]).abs() < 1e-6 * c);
        assert!((r1.parameters[0] - r2.parameters[0]).abs() < 1e-8);
    }

    #[test]
    fn too_few_points_rejected() {
        let model = FitModel::new(ModelKind::RbExp);
        let x = [1.0, 2.0, 3.0];
        let y = [0.9, 0.8, 0.7];
        assert!(fit(&model, &x, &y, None, &[0.5, 0.9, 0.5]).is_err());
    }
}
