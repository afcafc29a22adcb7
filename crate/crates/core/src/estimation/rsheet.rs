//! Joint fit of the sheet-resistance model to several film thicknesses.
//!
//! Free parameters: one `a_over_vD` per thickness, plus `nD0_vD`,
//! `eta_vD23` and `r_s` shared by all thicknesses. The optimiser works on
//! transformed coordinates (log for the positive quantities, logit for the
//! occupied fraction) so bounds hold without a constrained solver.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lm::{self, numeric_jacobian, Difference, LmConfig};
use super::FilmPoint;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numeric::rms;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Inverse variance when every point carries an uncertainty, unit otherwise.
    #[default]
    Auto,
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub weighting: Weighting,
    /// Fit `ln R` instead of `R`; useful when resistances span decades.
    pub log_residuals: bool,
    pub lm: LmConfig,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            weighting: Weighting::Auto,
            log_residuals: false,
            // Forward differences bias the optimum of a noisy fit by ~1e-8
            // relative, which is larger than the invariance the fit promises.
            lm: LmConfig { jacobian: Difference::Central, ..LmConfig::default() },
        }
    }
}

/// Parameter covariance, row-major, rows and columns labelled by `index`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covariance {
    pub index: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
}

impl Covariance {
    pub fn std_dev(&self, name: &str) -> Option<f64> {
        let i = self.index.iter().position(|n| n == name)?;
        Some(self.matrix[i][i].sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub params: ModelParams,
    pub covariance: Covariance,
    /// Unweighted RMS of `R_obs - R_model` per thickness (nm key), ohm.
    pub residual_rms: BTreeMap<u32, f64>,
    pub n_iterations: usize,
    pub converged: bool,
    pub chi2: f64,
    pub dof: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
struct Row {
    slot: usize,
    d0: f64,
    fluence: f64,
    r: f64,
    sigma: Option<f64>,
    sqrt_w: f64,
}

struct Problem {
    rows: Vec<Row>,
    thicknesses: Vec<u32>,
    log_residuals: bool,
    sigma_weighted: bool,
}

struct Physical<'a> {
    a: &'a [f64],
    nd0: f64,
    eta: f64,
    r_s: f64,
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

impl Problem {
    fn n_params(&self) -> usize {
        self.thicknesses.len() + 3
    }

    fn to_physical(&self, x: &DVector<f64>) -> (Vec<f64>, f64, f64, f64) {
        let k = self.thicknesses.len();
        let a = (0..k).map(|i| x[i].exp()).collect();
        (a, logistic(x[k]), x[k + 1].exp(), x[k + 2].exp())
    }

    fn encode(&self, p: &ModelParams, fallback: &BTreeMap<u32, f64>) -> DVector<f64> {
        let mut x = Vec::with_capacity(self.n_params());
        for d in &self.thicknesses {
            let a = p.a_over_vd.get(d).or(fallback.get(d)).copied().unwrap_or(1.0);
            x.push(a.ln());
        }
        x.push(logit(p.nd0_vd.clamp(1e-6, 1.0 - 1e-9)));
        x.push(p.eta_vd23.max(1e-300).ln());
        x.push(p.r_s.max(1e-300).ln());
        DVector::from_vec(x)
    }

    fn model(row: &Row, p: &Physical<'_>) -> Result<f64> {
        let d_eff = row.d0 - p.r_s * row.fluence;
        if !(d_eff > 0.0) {
            return Err(Error::ThicknessExhausted { fluence: row.fluence, limit: row.d0 / p.r_s });
        }
        let frac = 1.0 - (1.0 - p.nd0) * (-p.eta * row.fluence).exp();
        Ok(frac * p.a[row.slot] / d_eff)
    }

    fn residuals(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let (a, nd0, eta, r_s) = self.to_physical(x);
        let p = Physical { a: &a, nd0, eta, r_s };
        let mut out = DVector::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            let m = Self::model(row, &p)?;
            out[i] = if self.log_residuals {
                (row.r.ln() - m.ln()) * row.sqrt_w
            } else {
                (row.r - m) * row.sqrt_w
            };
        }
        Ok(out)
    }

    fn names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.thicknesses.iter().map(|d| format!("a_over_vD[{d}]")).collect();
        names.extend(["nD0_vD", "eta_vD23", "r_s"].map(String::from));
        names
    }
}

/// Starting point: `nD0_vD = 0.5`, `eta_vD23 = 1e-2 nm^2`,
/// `r_s = 1e-3 nm per ion/nm^2`, and `a_over_vD[d] = R(lowest fluence) * d`.
pub fn initial_guess(data: &[FilmPoint]) -> ModelParams {
    let mut a_over_vd = BTreeMap::new();
    let mut lowest: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    for p in data {
        if let Some(r) = p.r_sheet {
            let key = p.d0.round() as u32;
            let e = lowest.entry(key).or_insert((f64::INFINITY, r));
            if p.fluence < e.0 {
                *e = (p.fluence, r);
            }
        }
    }
    for (d, (_, r)) in lowest {
        a_over_vd.insert(d, r * d as f64);
    }
    let published = ModelParams::published();
    ModelParams {
        a_over_vd,
        nd0_vd: 0.5,
        eta_vd23: 1e-2,
        r_s: 1e-3,
        scaling_a: published.scaling_a,
        scaling_b: published.scaling_b,
        resistance_scale: 1.0,
        interpolate_thickness: false,
    }
}

fn build_problem(data: &[FilmPoint], opts: &FitOptions, warnings: &mut Vec<String>) -> Result<Problem> {
    let mut pts: Vec<&FilmPoint> = Vec::new();
    for (i, p) in data.iter().enumerate() {
        p.validate().map_err(|e| Error::invalid(format!("row {}", i + 1), e.to_string()))?;
        if let Some(r) = p.r_sheet {
            if !(r > 0.0) {
                return Err(Error::NonPositiveInput { field: "r_sheet_ohm", value: r });
            }
            if (p.d0 - p.d0.round()).abs() > 1e-9 {
                return Err(Error::invalid(format!("row {}", i + 1), "d0_nm must be a whole number of nm"));
            }
            pts.push(p);
        }
    }
    // Canonical order makes the fit independent of input row order.
    pts.sort_by(|a, b| {
        a.d0.total_cmp(&b.d0)
            .then(a.fluence.total_cmp(&b.fluence))
            .then(a.r_sheet.unwrap().total_cmp(&b.r_sheet.unwrap()))
            .then(a.sigma_r.unwrap_or(0.0).total_cmp(&b.sigma_r.unwrap_or(0.0)))
    });

    let mut thicknesses: Vec<u32> = pts.iter().map(|p| p.d0.round() as u32).collect();
    thicknesses.dedup();
    if thicknesses.is_empty() {
        return Err(Error::InsufficientData("no points with a sheet resistance".into()));
    }
    for &d in &thicknesses {
        let mut fl: Vec<f64> = pts.iter().filter(|p| p.d0.round() as u32 == d).map(|p| p.fluence).collect();
        fl.dedup();
        if fl.len() < 2 {
            return Err(Error::InsufficientData(format!("thickness {d} nm needs at least 2 distinct fluences")));
        }
    }
    let n_params = thicknesses.len() + 3;
    if pts.len() < n_params {
        return Err(Error::InsufficientData(format!(
            "{} points cannot determine {n_params} parameters",
            pts.len()
        )));
    }

    let all_sigma = pts.iter().all(|p| p.sigma_r.is_some());
    let use_sigma = opts.weighting == Weighting::Auto && all_sigma;
    if opts.weighting == Weighting::Auto && !all_sigma && pts.iter().any(|p| p.sigma_r.is_some()) {
        warnings.push("some points lack sigma_r_ohm: using unit weights for all points".into());
    }
    let raw_w: Vec<f64> = pts
        .iter()
        .map(|p| {
            if !use_sigma {
                1.0
            } else if opts.log_residuals {
                // sigma of ln R is sigma_R / R
                (p.r_sheet.unwrap() / p.sigma_r.unwrap()).powi(2)
            } else {
                p.sigma_r.unwrap().powi(-2)
            }
        })
        .collect();
    // Weights are normalised to unit mean: a global rescaling of all
    // uncertainties leaves the optimisation path unchanged.
    let mean_w = raw_w.iter().sum::<f64>() / raw_w.len() as f64;

    let rows = pts
        .iter()
        .zip(&raw_w)
        .map(|(p, &w)| Row {
            slot: thicknesses.binary_search(&(p.d0.round() as u32)).unwrap(),
            d0: p.d0,
            fluence: p.fluence,
            r: p.r_sheet.unwrap(),
            sigma: p.sigma_r,
            sqrt_w: (w / mean_w).sqrt(),
        })
        .collect();
    Ok(Problem { rows, thicknesses, log_residuals: opts.log_residuals, sigma_weighted: use_sigma })
}

/// Fits the resistance model to every point that carries a sheet
/// resistance. Scaling-law constants are copied from `init` unchanged.
pub fn fit_rsheet_model(data: &[FilmPoint], init: &ModelParams, opts: &FitOptions) -> Result<FitReport> {
    let mut warnings = Vec::new();
    let problem = build_problem(data, opts, &mut warnings)?;
    let fallback = initial_guess(data).a_over_vd;
    let x0 = problem.encode(init, &fallback);

    let out = lm::minimize(|x| problem.residuals(x), x0, &opts.lm)?;
    let (a, nd0, eta, r_s) = problem.to_physical(&out.x);

    let n = problem.rows.len();
    let n_params = problem.n_params();
    let dof = n - n_params;
    let inv = lm::normal_matrix_inverse(&out.jacobian)?;
    let sigma2 = if dof > 0 {
        out.objective / dof as f64
    } else {
        warnings.push("zero degrees of freedom: covariance is not estimable and is reported as zero".into());
        0.0
    };
    // Chain rule from transformed to physical coordinates.
    let mut dphys = a.clone();
    dphys.extend([nd0 * (1.0 - nd0), eta, r_s]);
    let cov = DMatrix::from_fn(n_params, n_params, |i, j| sigma2 * inv[(i, j)] * dphys[i] * dphys[j]);

    let mut params = init.clone();
    params.a_over_vd = problem.thicknesses.iter().copied().zip(a.iter().copied()).collect();
    params.nd0_vd = nd0;
    params.eta_vd23 = eta;
    params.r_s = r_s;
    params.resistance_scale = 1.0;

    let phys = Physical { a: &a, nd0, eta, r_s };
    let mut residual_rms = BTreeMap::new();
    for (slot, &d) in problem.thicknesses.iter().enumerate() {
        let res: Vec<f64> = problem
            .rows
            .iter()
            .filter(|r| r.slot == slot)
            .map(|r| Problem::model(r, &phys).map(|m| r.r - m))
            .collect::<Result<_>>()?;
        residual_rms.insert(d, rms(res));
    }
    if nd0 > 1.0 - 1e-6 {
        warnings.push("nD0_vD converged to its upper bound 1".into());
    }

    // The optimiser sees unit-mean weights; chi-square uses the stated sigmas.
    let chi2 = if problem.sigma_weighted { chi_square(&problem, &phys) } else { out.objective };

    Ok(FitReport {
        params,
        covariance: Covariance {
            index: problem.names(),
            matrix: (0..n_params).map(|i| (0..n_params).map(|j| cov[(i, j)]).collect()).collect(),
        },
        residual_rms,
        n_iterations: out.iterations,
        converged: true,
        chi2,
        dof,
        warnings,
    })
}

fn chi_square(problem: &Problem, p: &Physical<'_>) -> f64 {
    problem
        .rows
        .iter()
        .map(|row| {
            let m = Problem::model(row, p).unwrap_or(f64::NAN);
            let s = row.sigma.unwrap_or(1.0);
            if problem.log_residuals {
                ((row.r.ln() - m.ln()) * row.r / s).powi(2)
            } else {
                ((row.r - m) / s).powi(2)
            }
        })
        .sum()
}

/// Jacobian of the weighted residuals with respect to the transformed
/// parameters at `params`; exposed for cross-checking difference schemes.
pub fn rsheet_jacobian(data: &[FilmPoint], params: &ModelParams, opts: &FitOptions, scheme: Difference) -> Result<DMatrix<f64>> {
    let mut warnings = Vec::new();
    let problem = build_problem(data, opts, &mut warnings)?;
    let x = problem.encode(params, &initial_guess(data).a_over_vd);
    let r0 = problem.residuals(&x)?;
    numeric_jacobian(&|x: &DVector<f64>| problem.residuals(x), &x, &r0, scheme)
}
