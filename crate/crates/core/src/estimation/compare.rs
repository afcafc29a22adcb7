//! Side-by-side residual table for models fitted to the same observations.

use serde::{Deserialize, Serialize};

use crate::numeric::rms;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateFit {
    pub name: String,
    pub n_params: usize,
    /// `observed - predicted` for every observation, in the same order for
    /// every candidate.
    pub residuals: Vec<f64>,
}

impl CandidateFit {
    pub fn from_predictions(name: impl Into<String>, n_params: usize, observed: &[f64], predicted: &[f64]) -> Self {
        CandidateFit {
            name: name.into(),
            n_params,
            residuals: observed.iter().zip(predicted).map(|(o, p)| o - p).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedModel {
    pub rank: usize,
    pub name: String,
    pub residual_rms: f64,
    pub n_params: usize,
    pub n_points: usize,
}

/// Orders candidates by residual RMS, then by parameter count. The table is
/// descriptive only.
pub fn compare_models(candidates: &[CandidateFit]) -> Vec<RankedModel> {
    let mut rows: Vec<RankedModel> = candidates
        .iter()
        .map(|c| RankedModel {
            rank: 0,
            name: c.name.clone(),
            residual_rms: rms(c.residuals.iter().copied()),
            n_params: c.n_params,
            n_points: c.residuals.len(),
        })
        .collect();
    rows.sort_by(|a, b| {
        a.residual_rms
            .total_cmp(&b.residual_rms)
            .then(a.n_params.cmp(&b.n_params))
    });
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    rows
}
