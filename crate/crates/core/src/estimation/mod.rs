//! Parameter estimation: the shared-parameter resistance fit, the
//! scaling-law line, the empirical logarithmic Tc law and residual-based
//! model comparison.

pub mod compare;
pub mod curve;
pub mod lm;
pub mod rsheet;
pub mod scaling;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{sheet_resistance, tc_vs_fluence, FilmSpec, Fluence, ModelParams};

pub use compare::{compare_models, CandidateFit, RankedModel};
pub use curve::{fit_empirical_tc, fit_exponential, EmpiricalTcFit, ExponentialFit};
pub use lm::{Difference, LmConfig};
pub use rsheet::{fit_rsheet_model, initial_guess, rsheet_jacobian, Covariance, FitOptions, FitReport, Weighting};
pub use scaling::{fit_scaling_law, ScalingFit};

/// One film measurement at a given thickness and fluence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilmPoint {
    /// Nominal thickness, nm.
    pub d0: f64,
    /// Fluence, ions/nm^2.
    pub fluence: f64,
    /// Sheet resistance, ohm.
    pub r_sheet: Option<f64>,
    /// Critical temperature, K.
    pub tc: Option<f64>,
    pub sigma_r: Option<f64>,
    pub sigma_tc: Option<f64>,
}

impl FilmPoint {
    pub fn validate(&self) -> Result<()> {
        if !(self.d0 > 0.0 && self.d0.is_finite()) {
            return Err(Error::invalid("d0_nm", format!("must be > 0, got {}", self.d0)));
        }
        Fluence::new(self.fluence)?;
        if self.r_sheet.is_none() && self.tc.is_none() {
            return Err(Error::invalid("r_sheet_ohm/tc_K", "at least one of them must be present"));
        }
        for (name, v) in [("sigma_r_ohm", self.sigma_r), ("sigma_tc_K", self.sigma_tc)] {
            if let Some(s) = v {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::invalid(name, format!("uncertainty must be > 0, got {s}")));
                }
            }
        }
        for (name, v) in [("r_sheet_ohm", self.r_sheet), ("tc_K", self.tc)] {
            if let Some(x) = v {
                if !x.is_finite() {
                    return Err(Error::invalid(name, "must be finite"));
                }
            }
        }
        Ok(())
    }
}

/// Noise-free film points generated from the forward model: one point per
/// (thickness, fluence) with both sheet resistance and Tc.
pub fn synthesize(p: &ModelParams, thicknesses: &[f64], fluences: &[f64]) -> Result<Vec<FilmPoint>> {
    let mut out = Vec::with_capacity(thicknesses.len() * fluences.len());
    for &d0 in thicknesses {
        let film = FilmSpec::new(d0)?;
        for &f in fluences {
            let fl = Fluence::new(f)?;
            out.push(FilmPoint {
                d0,
                fluence: f,
                r_sheet: Some(sheet_resistance(fl, &film, p)?),
                tc: Some(tc_vs_fluence(fl, &film, p)?),
                sigma_r: None,
                sigma_tc: None,
            });
        }
    }
    Ok(out)
}

/// Fluence grid used for synthetic recovery studies, ions/nm^2.
pub const STUDY_FLUENCES: [f64; 8] = [0.0, 50.0, 100.0, 200.0, 400.0, 800.0, 1600.0, 2600.0];

/// Calibrated film thicknesses, nm.
pub const STUDY_THICKNESSES: [f64; 3] = [8.0, 10.0, 12.0];
