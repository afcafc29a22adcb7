//! Comparator curves: the logarithmic empirical Tc law and an exponential
//! decay for switching-current density.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::lm::{self, LmConfig};
use super::FilmPoint;
use crate::error::{Error, Result};
use crate::numeric::{fit_line, rms};

/// `Tc(F) = -a ln(F + b) + c` with `b > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTcFit {
    pub d0: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// RMS of `Tc_obs - Tc_fit`, K.
    pub residual_rms: f64,
    pub n: usize,
    pub n_iterations: usize,
}

impl EmpiricalTcFit {
    pub fn eval(&self, fluence: f64) -> f64 {
        -self.a * (fluence + self.b).ln() + self.c
    }
}

/// Fits the logarithmic law to the points of thickness `d0` that carry a Tc.
///
/// `b` is seeded from a log-spaced scan in which `a` and `c` follow from a
/// linear fit, then all three are refined together with `ln b` as the free
/// coordinate.
pub fn fit_empirical_tc(data: &[FilmPoint], d0: f64) -> Result<EmpiricalTcFit> {
    let mut pts: Vec<(f64, f64)> = data
        .iter()
        .filter(|p| (p.d0 - d0).abs() <= 1e-9 * d0.abs().max(1.0))
        .filter_map(|p| p.tc.map(|t| (p.fluence, t)))
        .collect();
    if let Some(&(f, _)) = pts.iter().find(|(f, _)| !(*f >= 0.0 && f.is_finite())) {
        return Err(Error::invalid("fluence_per_nm2", format!("must be >= 0, got {f}")));
    }
    if pts.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "empirical Tc fit for d0={d0} nm needs at least 4 points with tc, got {}",
            pts.len()
        )));
    }
    pts.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut distinct: Vec<f64> = pts.iter().map(|p| p.0).collect();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InsufficientData("empirical Tc fit needs at least 3 distinct fluences".into()));
    }

    let mut best: Option<(f64, f64, f64, f64)> = None;
    for i in 0..=80 {
        let b = 10f64.powf(-3.0 + 8.0 * i as f64 / 80.0);
        let xy: Vec<(f64, f64)> = pts.iter().map(|&(f, t)| ((f + b).ln(), t)).collect();
        let line = fit_line(&xy)?;
        if best.is_none_or(|(_, _, _, r)| line.residual_rms < r) {
            best = Some((-line.slope, b, line.intercept, line.residual_rms));
        }
    }
    let (a0, b0, c0, _) = best.expect("scan is non-empty");

    let residuals = |x: &DVector<f64>| -> Result<DVector<f64>> {
        let b = x[1].exp();
        Ok(DVector::from_iterator(pts.len(), pts.iter().map(|&(f, t)| t - (-x[0] * (f + b).ln() + x[2]))))
    };
    let out = lm::minimize(residuals, DVector::from_vec(vec![a0, b0.ln(), c0]), &LmConfig::default())?;
    Ok(EmpiricalTcFit {
        d0,
        a: out.x[0],
        b: out.x[1].exp(),
        c: out.x[2],
        residual_rms: rms(out.residuals.iter().copied()),
        n: pts.len(),
        n_iterations: out.iterations,
    })
}

/// `y(F) = y0 exp(-k F)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    pub y0: f64,
    pub k: f64,
    pub residual_rms: f64,
    pub n: usize,
}

impl ExponentialFit {
    pub fn eval(&self, fluence: f64) -> f64 {
        self.y0 * (-self.k * fluence).exp()
    }
}

/// Least-squares exponential through positive `(fluence, value)` pairs,
/// seeded by a straight line through `ln value`.
pub fn fit_exponential(points: &[(f64, f64)]) -> Result<ExponentialFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "exponential fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    if let Some(&(_, y)) = pts.iter().find(|p| !(p.1 > 0.0)) {
        return Err(Error::NonPositiveInput { field: "value", value: y });
    }
    let seed = fit_line(&pts.iter().map(|&(f, y)| (f, y.ln())).collect::<Vec<_>>())?;
    let residuals = |x: &DVector<f64>| -> Result<DVector<f64>> {
        Ok(DVector::from_iterator(pts.len(), pts.iter().map(|&(f, y)| y - x[0].exp() * (-x[1] * f).exp())))
    };
    let out = lm::minimize(residuals, DVector::from_vec(vec![seed.intercept, -seed.slope]), &LmConfig::default())?;
    Ok(ExponentialFit {
        y0: out.x[0].exp(),
        k: out.x[1],
        residual_rms: rms(out.residuals.iter().copied()),
        n: pts.len(),
    })
}
