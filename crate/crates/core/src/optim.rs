//! Damped least squares (Levenberg–Marquardt) used by the calibration and
//! spectral fitters.
//!
//! The driver works on weighted residual vectors r(p) with r_i =
//! (y_i − f_i(p))/σ_i; parameter bounds are handled by the callers through
//! smooth transforms (logit, log) rather than clipping.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Options for one minimization.
#[derive(Debug, Clone)]
pub struct LevMarOptions {
    pub max_iterations: usize,
    /// Relative cost-improvement threshold for convergence.
    pub cost_tolerance: f64,
    /// Relative step-size threshold for convergence.
    pub step_tolerance: f64,
    /// Initial damping parameter.
    pub lambda_init: f64,
    /// Relative step for central finite differences.
    pub fd_relative_step: f64,
}

impl Default for LevMarOptions {
    fn default() -> Self {
        LevMarOptions {
            max_iterations: 200,
            cost_tolerance: 1e-12,
            step_tolerance: 1e-10,
            lambda_init: 1e-3,
            fd_relative_step: 1e-6,
        }
    }
}

/// Result of a converged minimization.
#[derive(Debug, Clone)]
pub struct LevMarFit {
    pub params: Vec<f64>,
    /// Sum of squared weighted residuals at the optimum.
    pub chi2: f64,
    /// (JᵀJ)⁻¹ at the optimum (parameter covariance for unit-variance
    /// weighted residuals).
    pub covariance: DMatrix<f64>,
    pub iterations: usize,
    pub n_residuals: usize,
}

impl LevMarFit {
    /// 1σ uncertainties from the covariance diagonal, optionally scaled by
    /// the reduced χ² (used when the weights are only relative).
    pub fn sigmas(&self, scale_by_reduced_chi2: bool) -> Vec<f64> {
        let dof = (self.n_residuals as i64 - self.params.len() as i64).max(1) as f64;
        let scale = if scale_by_reduced_chi2 {
            (self.chi2 / dof).max(0.0)
        } else {
            1.0
        };
        (0..self.params.len())
            .map(|i| (self.covariance[(i, i)] * scale).max(0.0).sqrt())
            .collect()
    }
}

fn cost(r: &DVector<f64>) -> f64 {
    r.dot(r)
}

/// Central-difference Jacobian of the residual vector.
fn numeric_jacobian<F>(
    residuals: &mut F,
    params: &[f64],
    n_res: usize,
    rel_step: f64,
) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64]) -> Result<DVector<f64>>,
{
    let n_par = params.len();
    let mut jac = DMatrix::zeros(n_res, n_par);
    let mut p = params.to_vec();
    for j in 0..n_par {
        let h = rel_step * params[j].abs().max(1e-8);
        p[j] = params[j] + h;
        let r_plus = residuals(&p)?;
        p[j] = params[j] - h;
        let r_minus = residuals(&p)?;
        p[j] = params[j];
        for i in 0..n_res {
            jac[(i, j)] = (r_plus[i] - r_minus[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Minimize ‖r(p)‖² starting from `init`. `jacobian` may be `None`, in
/// which case central differences on `residuals` are used.
pub fn levenberg_marquardt<F, J>(
    mut residuals: F,
    mut jacobian: Option<J>,
    init: &[f64],
    opts: &LevMarOptions,
) -> Result<LevMarFit>
where
    F: FnMut(&[f64]) -> Result<DVector<f64>>,
    J: FnMut(&[f64]) -> Result<DMatrix<f64>>,
{
    let mut params = init.to_vec();
    let mut r = residuals(&params)?;
    let n_res = r.len();
    if n_res < params.len() {
        return Err(Error::validation(format!(
            "under-determined fit: {} residuals for {} parameters",
            n_res,
            params.len()
        )));
    }
    let mut current_cost = cost(&r);
    let mut lambda = opts.lambda_init;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..opts.max_iterations {
        iterations = iter + 1;
        let jac = match jacobian.as_mut() {
            Some(j) => j(&params)?,
            None => numeric_jacobian(&mut residuals, &params, n_res, opts.fd_relative_step)?,
        };
        let jt = jac.transpose();
        let hessian = &jt * &jac;
        let gradient = &jt * &r;
        if gradient.amax() < 1e-14 * (1.0 + current_cost) {
            converged = true;
            break;
        }

        let mut accepted = false;
        for _ in 0..25 {
            // Marquardt scaling: damp by the Hessian diagonal so the step
            // respects per-parameter curvature scales.
            let mut damped = hessian.clone();
            for d in 0..params.len() {
                let diag = hessian[(d, d)].max(1e-30);
                damped[(d, d)] = diag * (1.0 + lambda);
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&gradient);
            let trial: Vec<f64> = params
                .iter()
                .zip(step.iter())
                .map(|(p, s)| p + s)
                .collect();
            let r_trial = match residuals(&trial) {
                Ok(v) => v,
                Err(_) => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let trial_cost = cost(&r_trial);
            if trial_cost.is_finite() && trial_cost < current_cost {
                let step_small = step
                    .iter()
                    .zip(params.iter())
                    .all(|(s, p)| s.abs() <= opts.step_tolerance * (p.abs() + 1e-12));
                let improvement = (current_cost - trial_cost) / current_cost.max(1e-300);
                params = trial;
                r = r_trial;
                current_cost = trial_cost;
                lambda = (lambda * 0.3).max(1e-12);
                accepted = true;
                if step_small || improvement < opts.cost_tolerance {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e14 {
                break;
            }
        }
        if !accepted {
            // No downhill step found anywhere: accept the current point as
            // the minimum if the damping is exhausted.
            converged = current_cost.is_finite();
            break;
        }
        if converged {
            break;
        }
    }

    if !converged && iterations >= opts.max_iterations {
        return Err(Error::numerical(format!(
            "fit did not converge in {} iterations (cost {current_cost:.3e})",
            opts.max_iterations
        )));
    }

    // Covariance from the undamped normal matrix at the optimum.
    let jac = match jacobian.as_mut() {
        Some(j) => j(&params)?,
        None => numeric_jacobian(&mut residuals, &params, n_res, opts.fd_relative_step)?,
    };
    let hessian = jac.transpose() * &jac;
    let n = params.len();
    let covariance = hessian
        .clone()
        .try_inverse()
        .unwrap_or_else(|| DMatrix::from_element(n, n, f64::INFINITY));
    Ok(LevMarFit {
        params,
        chi2: current_cost,
        covariance,
        iterations,
        n_residuals: n_res,
    })
}

/// Convenience wrapper for numeric-Jacobian fits.
pub fn levenberg_marquardt_fd<F>(
    residuals: F,
    init: &[f64],
    opts: &LevMarOptions,
) -> Result<LevMarFit>
where
    F: FnMut(&[f64]) -> Result<DVector<f64>>,
{
    levenberg_marquardt(
        residuals,
        None::<fn(&[f64]) -> Result<DMatrix<f64>>>,
        init,
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn recovers_exponential_decay() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let truth = (2.5, 0.7);
        let ys: Vec<f64> = xs.iter().map(|x| truth.0 * (-truth.1 * x).exp()).collect();
        let fit = levenberg_marquardt_fd(
            |p: &[f64]| {
                Ok(DVector::from_iterator(
                    xs.len(),
                    xs.iter()
                        .zip(ys.iter())
                        .map(|(x, y)| y - p[0] * (-p[1] * x).exp()),
                ))
            },
            &[1.0, 0.2],
            &LevMarOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(fit.params[0], truth.0, max_relative = 1e-8);
        assert_relative_eq!(fit.params[1], truth.1, max_relative = 1e-8);
        assert!(fit.chi2 < 1e-16);
    }

    #[test]
    fn underdetermined_is_rejected() {
        let res = levenberg_marquardt_fd(
            |_p: &[f64]| Ok(DVector::from_vec(vec![1.0])),
            &[0.0, 0.0],
            &LevMarOptions::default(),
        );
        assert!(res.is_err());
    }
}
