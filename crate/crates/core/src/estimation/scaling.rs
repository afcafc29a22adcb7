//! Joint straight-line fit of `ln(d0 Tc)` against `ln R_sheet` across all
//! thicknesses.

use serde::{Deserialize, Serialize};

use super::{Covariance, FilmPoint};
use crate::error::{Error, Result};
use crate::numeric::fit_line;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Prefactor `A`.
    pub a: f64,
    /// Exponent `B`.
    pub b: f64,
    /// Covariance of `(A, B)`; `A` through the delta method from the intercept.
    pub covariance: Covariance,
    /// RMS of the log-space residuals.
    pub residual_rms: f64,
    pub n: usize,
    pub warnings: Vec<String>,
}

pub fn fit_scaling_law(data: &[FilmPoint]) -> Result<ScalingFit> {
    let mut warnings = Vec::new();
    let mut pts = Vec::with_capacity(data.len());
    for p in data {
        let (Some(r), Some(tc)) = (p.r_sheet, p.tc) else {
            warnings.push(format!("skipped point d0={} F={}: needs both r_sheet and tc", p.d0, p.fluence));
            continue;
        };
        if !(r > 0.0) {
            return Err(Error::NonPositiveInput { field: "r_sheet_ohm", value: r });
        }
        if !(tc > 0.0) {
            return Err(Error::NonPositiveInput { field: "tc_K", value: tc });
        }
        if !(p.d0 > 0.0) {
            return Err(Error::NonPositiveInput { field: "d0_nm", value: p.d0 });
        }
        pts.push((r.ln(), (p.d0 * tc).ln()));
    }
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "scaling fit needs at least 3 points with r_sheet and tc, got {}",
            pts.len()
        )));
    }
    // Sorting fixes the summation order, so row permutations give identical bits.
    pts.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let line = fit_line(&pts)?;
    let a = line.intercept.exp();
    let b = -line.slope;
    let [[vi, cis], [_, vs]] = line.cov;
    Ok(ScalingFit {
        a,
        b,
        covariance: Covariance {
            index: vec!["A".into(), "B".into()],
            matrix: vec![vec![a * a * vi, -a * cis], vec![-a * cis, vs]],
        },
        residual_rms: line.residual_rms,
        n: line.n,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{synthesize, STUDY_FLUENCES, STUDY_THICKNESSES};
    use crate::model::ModelParams;

    #[test]
    fn exact_power_law_is_recovered() {
        let data = synthesize(&ModelParams::published(), &STUDY_THICKNESSES, &STUDY_FLUENCES).unwrap();
        let fit = fit_scaling_law(&data).unwrap();
        assert!(((fit.a - 1.44e4) / 1.44e4).abs() < 1e-12, "{}", fit.a);
        assert!(((fit.b - 0.957) / 0.957).abs() < 1e-12, "{}", fit.b);
        assert!(fit.residual_rms < 1e-12);
    }

    #[test]
    fn identical_points_are_insufficient() {
        let p = FilmPoint { d0: 10.0, fluence: 0.0, r_sheet: Some(200.0), tc: Some(9.0), sigma_r: None, sigma_tc: None };
        let err = fit_scaling_law(&[p.clone(), p.clone(), p]).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
    }

    #[test]
    fn non_positive_inputs_are_rejected() {
        let mut data = synthesize(&ModelParams::published(), &[10.0], &[0.0, 100.0, 200.0]).unwrap();
        data[1].tc = Some(0.0);
        assert!(matches!(fit_scaling_law(&data), Err(Error::NonPositiveInput { .. })));
        data[1].tc = Some(8.0);
        data[2].r_sheet = Some(-1.0);
        assert!(matches!(fit_scaling_law(&data), Err(Error::NonPositiveInput { .. })));
    }

    #[test]
    fn noisy_covariance_is_psd() {
        let mut data = synthesize(&ModelParams::published(), &STUDY_THICKNESSES, &STUDY_FLUENCES).unwrap();
        for (i, p) in data.iter_mut().enumerate() {
            p.tc = p.tc.map(|t| t * (1.0 + 0.01 * ((i % 3) as f64 - 1.0)));
        }
        let fit = fit_scaling_law(&data).unwrap();
        let m = &fit.covariance.matrix;
        assert!(m[0][0] > 0.0 && m[1][1] > 0.0);
        assert!(m[0][0] * m[1][1] - m[0][1] * m[1][0] >= 0.0);
        assert_eq!(m[0][1], m[1][0]);
    }
}
