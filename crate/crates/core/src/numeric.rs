//! Small numerical building blocks: bracketing root search and
//! ordinary least-squares lines.

use crate::error::{Error, Result};

/// Stopping rule for [`bisect`].
#[derive(Debug, Clone, Copy)]
pub struct BisectTol {
    /// Stop once the bracket width is below `x_rel * max(|lo|, |hi|)`.
    pub x_rel: f64,
    /// Stop once `|f(mid)|` is at most this value.
    pub f_abs: f64,
    pub max_iter: usize,
}

impl Default for BisectTol {
    fn default() -> Self {
        BisectTol {
            x_rel: 1e-12,
            f_abs: 0.0,
            max_iter: 2000,
        }
    }
}

/// Finds a zero of `f` inside `[lo, hi]`, where `f(lo)` and `f(hi)` must
/// have opposite signs (or one of them be zero).
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, tol: BisectTol) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut f_lo = f(lo)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let f_hi = f(hi)?;
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::InsufficientData(format!(
            "bisection bracket [{lo}, {hi}] does not enclose a sign change"
        )));
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..tol.max_iter {
        mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid.abs() <= tol.f_abs || f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol.x_rel * lo.abs().max(hi.abs()) {
            return Ok(lo + 0.5 * (hi - lo));
        }
    }
    Ok(mid)
}

/// Result of an ordinary least-squares straight-line fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Covariance of (intercept, slope), scaled by the residual variance.
    pub cov: [[f64; 2]; 2],
    pub residual_rms: f64,
    pub n: usize,
}

impl LineFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Unweighted least-squares line through `(x, y)` pairs.
///
/// Uses centred sums, so the slope of exactly collinear data is recovered
/// to rounding precision even when `x` carries a large offset.
pub fn fit_line(points: &[(f64, f64)]) -> Result<LineFit> {
    let n = points.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "line fit needs at least 2 points, got {n}"
        )));
    }
    let nf = n as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in points {
        let dx = x - mean_x;
        sxx += dx * dx;
        sxy += dx * (y - mean_y);
    }
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData(
            "regressor has zero variance".to_string(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ssr: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let s2 = if n > 2 { ssr / (nf - 2.0) } else { 0.0 };
    let var_slope = s2 / sxx;
    let var_intercept = s2 * (1.0 / nf + mean_x * mean_x / sxx);
    let cov_is = -mean_x * var_slope;
    Ok(LineFit {
        slope,
        intercept,
        cov: [[var_intercept, cov_is], [cov_is, var_slope]],
        residual_rms: (ssr / nf).sqrt(),
        n,
    })
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub(crate) fn rms(residuals: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for r in residuals {
        s += r * r;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        (s / n as f64).sqrt()
    }
}
