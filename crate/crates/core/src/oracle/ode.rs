//! Direct numerical integration of the defect-occupancy rate equation,
//! independent of its closed-form solution.

use crate::error::{Error, Result};
use crate::model::{defect_fraction, Fluence, ModelParams};

/// Adaptive classical Runge-Kutta (order 4) with step doubling.
///
/// Each step is taken once with `h` and twice with `h/2`; the difference
/// estimates the local error and the two results are combined by
/// Richardson extrapolation. The solution is reported at every entry of
/// `grid`, which must be non-decreasing and start at or after `x0`.
pub fn integrate_rk4_adaptive<F>(rhs: F, x0: f64, y0: f64, grid: &[f64], tol: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, f64) -> f64,
{
    if grid.windows(2).any(|w| w[1] < w[0]) || grid.first().is_some_and(|&g| g < x0) {
        return Err(Error::invalid("grid", "must be sorted and start at or after x0"));
    }
    let rk4 = |x: f64, y: f64, h: f64| {
        let k1 = rhs(x, y);
        let k2 = rhs(x + 0.5 * h, y + 0.5 * h * k1);
        let k3 = rhs(x + 0.5 * h, y + 0.5 * h * k2);
        let k4 = rhs(x + h, y + h * k3);
        y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };

    let span = grid.last().map_or(0.0, |&g| g - x0);
    let mut h = if span > 0.0 { span / 100.0 } else { 1.0 };
    let (mut x, mut y) = (x0, y0);
    let mut out = Vec::with_capacity(grid.len());
    for &target in grid {
        while x < target {
            let step = h.min(target - x);
            let full = rk4(x, y, step);
            let half = rk4(x, y, 0.5 * step);
            let two_halves = rk4(x + 0.5 * step, half, 0.5 * step);
            let err = (two_halves - full).abs() / 15.0;
            if err <= tol || step <= 1e-12 * x.abs().max(1.0) {
                x = if step == target - x { target } else { x + step };
                y = two_halves + (two_halves - full) / 15.0;
            }
            let factor = if err > 0.0 { 0.9 * (tol / err).powf(0.2) } else { 5.0 };
            h = step * factor.clamp(0.2, 5.0);
        }
        out.push(y);
    }
    Ok(out)
}

/// Integrates `df/dF = eta_vD23 (1 - f)` from `f(0) = nD0_vD` and returns
/// the largest absolute deviation from [`defect_fraction`] on `grid`.
pub fn ode_residual_check(p: &ModelParams, grid: &[f64]) -> Result<f64> {
    let eta = p.eta_vd23;
    let integrated = integrate_rk4_adaptive(|_, f| eta * (1.0 - f), 0.0, p.nd0_vd, grid, 1e-12)?;
    let mut worst = 0.0f64;
    for (&x, &y) in grid.iter().zip(&integrated) {
        let closed = defect_fraction(Fluence::new(x)?, p);
        worst = worst.max((y - closed).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(max: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| max * i as f64 / n as f64).collect()
    }

    #[test]
    fn published_parameters_agree_with_closed_form() {
        let r = ode_residual_check(&ModelParams::published(), &grid(2600.0, 52)).unwrap();
        assert!(r < 1e-9, "{r}");
    }

    #[test]
    fn zero_cross_section_is_constant() {
        let mut p = ModelParams::published();
        p.eta_vd23 = 0.0;
        assert_eq!(ode_residual_check(&p, &grid(2600.0, 10)).unwrap(), 0.0);
    }

    #[test]
    fn saturated_start_is_a_fixed_point() {
        let mut p = ModelParams::published();
        p.nd0_vd = 1.0;
        assert_eq!(ode_residual_check(&p, &grid(2600.0, 10)).unwrap(), 0.0);
    }

    #[test]
    fn integrator_handles_exponential_growth() {
        let ys = integrate_rk4_adaptive(|_, y| y, 0.0, 1.0, &[0.5, 1.0, 2.0], 1e-13).unwrap();
        for (y, x) in ys.iter().zip([0.5f64, 1.0, 2.0]) {
            assert!((y - x.exp()).abs() / x.exp() < 1e-10);
        }
    }

    #[test]
    fn unsorted_grid_is_rejected() {
        assert!(integrate_rk4_adaptive(|_, y| y, 0.0, 1.0, &[1.0, 0.5], 1e-12).is_err());
    }
}
