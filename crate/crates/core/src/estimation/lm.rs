//! Damped Gauss-Newton (Levenberg-Marquardt) minimisation of a sum of
//! squared residuals with a finite-difference Jacobian.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmConfig {
    pub max_iterations: usize,
    /// Stop when an accepted step lowers the objective by less than this
    /// relative amount.
    pub ftol: f64,
    /// Stop when the gradient inf-norm falls below this value.
    pub gtol: f64,
    pub initial_lambda: f64,
    pub jacobian: Difference,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig {
            max_iterations: 500,
            ftol: 1e-10,
            gtol: 1e-8,
            initial_lambda: 1e-3,
            jacobian: Difference::Forward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Difference {
    Forward,
    Central,
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub x: DVector<f64>,
    pub residuals: DVector<f64>,
    pub jacobian: DMatrix<f64>,
    /// Sum of squared residuals at `x`.
    pub objective: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    /// Objective after every accepted step, starting with the initial point.
    pub history: Vec<f64>,
}

fn step_size(x: f64) -> f64 {
    f64::EPSILON.sqrt() * x.abs().max(1.0)
}

/// Finite-difference Jacobian of `f` at `x`; `r0` must equal `f(x)`.
pub fn numeric_jacobian<F>(f: &F, x: &DVector<f64>, r0: &DVector<f64>, scheme: Difference) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let mut jac = DMatrix::zeros(r0.len(), x.len());
    let mut probe = x.clone();
    for j in 0..x.len() {
        let xj = x[j];
        match scheme {
            Difference::Forward => {
                let h = step_size(xj);
                probe[j] = xj + h;
                let h = probe[j] - xj;
                let r = f(&probe)?;
                jac.set_column(j, &((r - r0) / h));
            }
            Difference::Central => {
                let h = f64::EPSILON.cbrt() * xj.abs().max(1.0);
                probe[j] = xj + h;
                let up = f(&probe)?;
                probe[j] = xj - h;
                let down = f(&probe)?;
                jac.set_column(j, &((up - down) / (2.0 * h)));
            }
        }
        probe[j] = xj;
    }
    Ok(jac)
}

/// Minimises `|f(x)|^2` starting from `x0`.
pub fn minimize<F>(f: F, x0: DVector<f64>, cfg: &LmConfig) -> Result<LmOutcome>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let mut x = x0;
    let mut r = f(&x)?;
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("initial parameters", "residuals are not finite at the starting point"));
    }
    let mut s = r.norm_squared();
    let mut jac = numeric_jacobian(&f, &x, &r, cfg.jacobian)?;
    let mut lambda = cfg.initial_lambda;
    let mut history = vec![s];
    let mut iterations = 0;

    loop {
        let g = jac.transpose() * &r;
        let g_norm = g.amax();
        if g_norm < cfg.gtol || s == 0.0 {
            return Ok(LmOutcome { x, residuals: r, jacobian: jac, objective: s, iterations, gradient_norm: g_norm, history });
        }
        if iterations >= cfg.max_iterations {
            return Err(Error::NonConvergence { iterations, gradient_norm: g_norm });
        }
        iterations += 1;

        let jtj = jac.transpose() * &jac;
        let diag: Vec<f64> = (0..jtj.nrows()).map(|i| jtj[(i, i)]).collect();
        if diag.iter().all(|&d| d == 0.0) {
            return Err(Error::SingularJacobian("Jacobian is identically zero".into()));
        }
        let floor = diag.iter().cloned().fold(0.0, f64::max) * 1e-15;

        let mut accepted = false;
        while lambda < 1e20 {
            let mut a = jtj.clone();
            for (i, &d) in diag.iter().enumerate() {
                a[(i, i)] += lambda * d.max(floor);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let delta = chol.solve(&(-&g));
            let x_new = &x + &delta;
            let trial = f(&x_new);
            let s_new = match &trial {
                Ok(r_new) if r_new.iter().all(|v| v.is_finite()) => r_new.norm_squared(),
                _ => f64::INFINITY,
            };
            if s_new < s {
                let rel = (s - s_new) / s;
                x = x_new;
                r = trial?;
                s = s_new;
                history.push(s);
                lambda = (lambda / 10.0).max(1e-15);
                jac = numeric_jacobian(&f, &x, &r, cfg.jacobian)?;
                accepted = true;
                if rel < cfg.ftol {
                    let g_norm = (jac.transpose() * &r).amax();
                    return Ok(LmOutcome { x, residuals: r, jacobian: jac, objective: s, iterations, gradient_norm: g_norm, history });
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No step of any length lowers the objective: the relative
            // decrease is zero, which satisfies the objective criterion.
            return Ok(LmOutcome { x, residuals: r, jacobian: jac, objective: s, iterations, gradient_norm: g_norm, history });
        }
    }
}

/// `(J^T J)^-1` after checking that `J` has full column rank.
///
/// Rank is judged on the column-normalised normal matrix so that parameter
/// scaling does not mask (or fake) a degeneracy.
pub fn normal_matrix_inverse(jac: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let jtj = jac.transpose() * jac;
    let n = jtj.nrows();
    let scale: Vec<f64> = (0..n).map(|i| jtj[(i, i)].sqrt()).collect();
    if let Some(i) = scale.iter().position(|&s| !(s > 0.0)) {
        return Err(Error::SingularJacobian(format!("parameter {i} does not influence any residual")));
    }
    let normalized = DMatrix::from_fn(n, n, |i, j| jtj[(i, j)] / (scale[i] * scale[j]));
    let eig = normalized.clone().symmetric_eigen();
    let (min, max) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(min > 1e-12 * max) {
        return Err(Error::SingularJacobian(format!(
            "normal matrix is rank deficient (eigenvalue ratio {:e})",
            min / max
        )));
    }
    let inv = normalized
        .cholesky()
        .ok_or_else(|| Error::SingularJacobian("normal matrix is not positive definite".into()))?
        .inverse();
    Ok(DMatrix::from_fn(n, n, |i, j| inv[(i, j)] / (scale[i] * scale[j])))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(DVector::from_vec(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]]))
    }

    #[test]
    fn solves_rosenbrock() {
        let out = minimize(rosenbrock, DVector::from_vec(vec![-1.2, 1.0]), &LmConfig::default()).unwrap();
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6, "{:?}", out.x);
    }

    #[test]
    fn objective_never_increases() {
        let out = minimize(rosenbrock, DVector::from_vec(vec![-1.2, 1.0]), &LmConfig::default()).unwrap();
        assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        let cfg = LmConfig { max_iterations: 2, ..LmConfig::default() };
        let err = minimize(rosenbrock, DVector::from_vec(vec![-1.2, 1.0]), &cfg).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { iterations: 2, .. }));
    }

    #[test]
    fn forward_and_central_jacobians_agree() {
        let x = DVector::from_vec(vec![0.3, -0.7]);
        let r = rosenbrock(&x).unwrap();
        let a = numeric_jacobian(&rosenbrock, &x, &r, Difference::Forward).unwrap();
        let b = numeric_jacobian(&rosenbrock, &x, &r, Difference::Central).unwrap();
        assert!((a - b).amax() < 1e-6);
    }

    #[test]
    fn rank_deficient_jacobian_is_detected() {
        let j = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert!(matches!(normal_matrix_inverse(&j), Err(Error::SingularJacobian(_))));
        let j = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let inv = normal_matrix_inverse(&j).unwrap();
        let expected = (j.transpose() * &j).try_inverse().unwrap();
        assert!((inv - expected).amax() < 1e-12);
    }
}
