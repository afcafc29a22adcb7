//! Reduction of resistance-temperature, Hall and van der Pauw measurements
//! to film quantities.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::constants::{E_CHARGE, K_B, NM};
use crate::error::{Error, Result};
use crate::numeric::{bisect, fit_line, median, BisectTol};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportRecord {
    /// K
    pub temperature: f64,
    /// T
    pub field: f64,
    /// ohm
    pub resistance: f64,
}

/// One resistance-temperature sweep.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TransportSweep {
    pub records: Vec<TransportRecord>,
}

impl TransportSweep {
    pub fn new(records: Vec<TransportRecord>) -> Result<Self> {
        let s = TransportSweep { records };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, r) in self.records.iter().enumerate() {
            if !r.temperature.is_finite() || !r.field.is_finite() || !r.resistance.is_finite() {
                return Err(Error::invalid(format!("record {}", i + 1), "values must be finite"));
            }
            if r.resistance < 0.0 {
                return Err(Error::invalid(format!("record {}", i + 1), "resistance must be >= 0"));
            }
        }
        Ok(())
    }

    /// The field shared by every record, or an error when the sweep mixes fields.
    pub fn field(&self) -> Result<f64> {
        let first = self
            .records
            .first()
            .ok_or_else(|| Error::InsufficientData("empty sweep".into()))?
            .field;
        if self.records.iter().any(|r| r.field != first) {
            return Err(Error::invalid("field_T", "a sweep must be taken at a single field"));
        }
        Ok(first)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TcOptions {
    /// Fraction of the normal-state plateau that defines Tc, within [0.1, 0.9].
    pub fraction: f64,
}

impl Default for TcOptions {
    fn default() -> Self {
        TcOptions { fraction: 0.5 }
    }
}

/// Share of the temperature span, counted down from the top, whose median
/// resistance defines the normal-state plateau.
pub const PLATEAU_WINDOW: f64 = 0.1;

/// Resistance below this share of the plateau counts as superconducting.
pub const SUPERCONDUCTING_FRACTION: f64 = 0.1;

/// Normal-state plateau of a sweep, ohm.
pub fn normal_state_plateau(sweep: &TransportSweep) -> Result<f64> {
    sweep.validate()?;
    if sweep.records.len() < 2 {
        return Err(Error::InsufficientData("a sweep needs at least 2 records".into()));
    }
    let (t_min, t_max) = sweep
        .records
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.temperature), hi.max(r.temperature)));
    let cut = t_max - PLATEAU_WINDOW * (t_max - t_min);
    let mut top: Vec<f64> = sweep.records.iter().filter(|r| r.temperature >= cut).map(|r| r.resistance).collect();
    Ok(median(&mut top))
}

/// Temperature at which the resistance crosses `fraction` of the
/// normal-state plateau, linearly interpolated between samples.
pub fn extract_tc(sweep: &TransportSweep, opts: &TcOptions) -> Result<f64> {
    if !(0.1..=0.9).contains(&opts.fraction) {
        return Err(Error::invalid("fraction", format!("must lie in [0.1, 0.9], got {}", opts.fraction)));
    }
    let plateau = normal_state_plateau(sweep)?;
    let floor = SUPERCONDUCTING_FRACTION * plateau;
    let mut recs = sweep.records.clone();
    recs.sort_by(|a, b| a.temperature.total_cmp(&b.temperature).then(a.resistance.total_cmp(&b.resistance)));
    if !(plateau > 0.0) || !recs.iter().any(|r| r.resistance < floor) {
        return Err(Error::NoTransition { threshold: floor });
    }

    let level = opts.fraction * plateau;
    let crossings: Vec<f64> = recs
        .windows(2)
        .filter(|w| (w[0].resistance >= level) != (w[1].resistance >= level))
        .map(|w| {
            let t = (level - w[0].resistance) / (w[1].resistance - w[0].resistance);
            w[0].temperature + t * (w[1].temperature - w[0].temperature)
        })
        .collect();
    match crossings.as_slice() {
        [tc] => Ok(*tc),
        [] => Err(Error::NoTransition { threshold: floor }),
        _ => Err(Error::NonMonotonicAmbiguity { level, crossings }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bc2Options {
    pub tc: TcOptions,
    /// Fields above this value (T) are left out of the line fit.
    pub max_field: f64,
    /// Keep only the N points with the highest Tc.
    pub highest_n: Option<usize>,
}

impl Default for Bc2Options {
    fn default() -> Self {
        Bc2Options { tc: TcOptions::default(), max_field: 1.0, highest_n: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bc2Slope {
    /// dB_c2/dT, T/K.
    pub slope: f64,
    pub slope_sigma: f64,
    /// (Tc in K, field in T) pairs used in the fit, ordered by field.
    pub points: Vec<(f64, f64)>,
}

/// Slope of the upper critical field near Tc from sweeps at several fields.
pub fn extract_bc2_slope(sweeps: &[TransportSweep], opts: &Bc2Options) -> Result<Bc2Slope> {
    let mut points = Vec::new();
    for s in sweeps {
        let b = s.field()?;
        if b < 0.0 || b > opts.max_field {
            continue;
        }
        points.push((extract_tc(s, &opts.tc)?, b));
    }
    if !points.iter().any(|p| p.1 == 0.0) {
        return Err(Error::InsufficientData("B_c2 slope needs a zero-field sweep".into()));
    }
    if let Some(n) = opts.highest_n {
        points.sort_by(|a, b| b.0.total_cmp(&a.0));
        points.truncate(n);
    }
    points.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    let mut fields: Vec<f64> = points.iter().map(|p| p.1).collect();
    fields.dedup();
    if fields.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "B_c2 slope needs at least 3 distinct fields, got {}",
            fields.len()
        )));
    }
    let line = fit_line(&points)?;
    Ok(Bc2Slope { slope: line.slope, slope_sigma: line.cov[1][1].sqrt(), points })
}

/// Electron diffusivity `4 k_B / (pi e |dB_c2/dT|)`, m^2/s.
pub fn diffusivity(slope: f64) -> Result<f64> {
    if !(slope < 0.0) {
        return Err(Error::NonNegativeSlope(slope));
    }
    Ok(4.0 * K_B / (PI * E_CHARGE * slope.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HallRecord {
    /// T
    pub field: f64,
    /// V
    pub hall_voltage: f64,
    /// A
    pub current: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HallSweep {
    pub records: Vec<HallRecord>,
    /// Film thickness, nm.
    pub d0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HallResult {
    /// d(V_H/I)/dB, ohm/T.
    pub slope: f64,
    /// Offset of V_H/I at zero field, ohm.
    pub intercept: f64,
    /// Hall coefficient, m^3/C.
    pub r_h: f64,
    /// `-1/(R_H e)`, m^-3; positive for electron conduction.
    pub n_e: f64,
}

/// Hall coefficient from a line through `V_H/I` versus `B` (with offset).
pub fn extract_hall(sweep: &HallSweep) -> Result<HallResult> {
    if !(sweep.d0 > 0.0) {
        return Err(Error::NonPositiveInput { field: "d0_nm", value: sweep.d0 });
    }
    let mut pts = Vec::with_capacity(sweep.records.len());
    for (i, r) in sweep.records.iter().enumerate() {
        if r.current == 0.0 || !r.current.is_finite() {
            return Err(Error::invalid(format!("record {}", i + 1), "current must be non-zero"));
        }
        if !r.field.is_finite() || !r.hall_voltage.is_finite() {
            return Err(Error::invalid(format!("record {}", i + 1), "values must be finite"));
        }
        pts.push((r.field, r.hall_voltage / r.current));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut fields: Vec<f64> = pts.iter().map(|p| p.0).collect();
    fields.dedup();
    if fields.len() < 2 {
        return Err(Error::InsufficientData("Hall fit needs at least 2 distinct fields".into()));
    }
    let line = fit_line(&pts)?;
    if line.slope == 0.0 {
        return Err(Error::ZeroSlope);
    }
    let r_h = line.slope * sweep.d0 * NM;
    Ok(HallResult { slope: line.slope, intercept: line.intercept, r_h, n_e: -1.0 / (r_h * E_CHARGE) })
}

/// Sheet resistance from two van der Pauw four-terminal resistances.
pub fn vdp_sheet_resistance(r_a: f64, r_b: f64) -> Result<f64> {
    for (field, v) in [("r_a", r_a), ("r_b", r_b)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::NonPositiveInput { field, value: v });
        }
    }
    let (lo, hi) = if r_a <= r_b { (r_a, r_b) } else { (r_b, r_a) };
    if lo == hi {
        return Ok(PI * lo / LN_2);
    }
    let residual = |rs: f64| Ok((-PI * lo / rs).exp() + (-PI * hi / rs).exp() - 1.0);
    bisect(residual, PI * lo / LN_2, PI * hi / LN_2, BisectTol::default())
}
