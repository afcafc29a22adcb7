//! Per-detector figures of merit: detection efficiency, switching-current
//! density, kinetic inductance, decay time and saturation.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{BCS_GAP_RATIO, DEFAULT_LOAD_OHM, HBAR, K_B, MU_0, NM, UA, UM};
use crate::data::ABSORPTION_CSV;
use crate::error::{ensure_positive, Error, Result};
use crate::model::{effective_thickness, sheet_resistance, tc_vs_fluence, FilmSpec, Fluence, ModelParams};

/// One point of a count-rate versus bias sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    /// uA
    pub bias: f64,
    /// Count rate under illumination, Hz.
    pub cr: f64,
    /// Dark count rate, Hz.
    pub dcr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorRecord {
    pub id: String,
    /// nm
    pub d0: f64,
    /// ions/nm^2
    pub fluence: f64,
    /// Measured wire width, nm.
    pub width: f64,
    pub fill_factor: f64,
    /// Side of the square active area, um.
    pub area_side: f64,
    /// Explicit wire length, um; derived from the meander geometry when absent.
    pub wire_length: Option<f64>,
    /// Switching current, uA.
    pub i_sw: f64,
    pub counts: Vec<CountRow>,
    /// Incident photon rate, Hz.
    pub photon_rate: f64,
}

impl DetectorRecord {
    pub fn validate(&self) -> Result<()> {
        let field = |name: &str| format!("detector {}: {name}", self.id);
        if !(self.fill_factor > 0.0 && self.fill_factor <= 1.0) {
            return Err(Error::invalid(field("fill_factor"), format!("must lie in (0, 1], got {}", self.fill_factor)));
        }
        for (name, v) in [
            ("d0_nm", self.d0),
            ("width_nm", self.width),
            ("area_um", self.area_side),
            ("isw_uA", self.i_sw),
            ("photon_rate_hz", self.photon_rate),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(field(name), format!("must be > 0, got {v}")));
            }
        }
        if !(self.fluence >= 0.0 && self.fluence.is_finite()) {
            return Err(Error::invalid(field("fluence_per_nm2"), format!("must be >= 0, got {}", self.fluence)));
        }
        if let Some(l) = self.wire_length {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::invalid(field("wire_length_um"), format!("must be > 0, got {l}")));
            }
        }
        for (i, c) in self.counts.iter().enumerate() {
            if !(c.cr >= 0.0 && c.dcr >= 0.0 && c.bias.is_finite()) {
                return Err(Error::invalid(field(&format!("counts row {}", i + 1)), "rates must be >= 0 and bias finite"));
            }
        }
        Ok(())
    }

    /// Number of squares `l/w` of the meander.
    ///
    /// Without an explicit length the meander is taken as parallel lines at
    /// pitch `width / fill_factor` filling the square area; bends are ignored.
    pub fn squares(&self) -> f64 {
        let width_um = self.width * NM / UM;
        match self.wire_length {
            Some(l) => l / width_um,
            None => {
                let lines = self.area_side * self.fill_factor / width_um;
                lines * self.area_side / width_um
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// K
    pub tc: f64,
    /// Zero-temperature gap, J.
    pub gap0: f64,
    /// ohm
    pub r_load: f64,
}

impl MaterialParams {
    /// Weak-coupling gap `1.764 k_B Tc` and a 50 ohm load.
    pub fn bcs(tc: f64) -> Result<Self> {
        ensure_positive("tc", tc)?;
        Ok(MaterialParams { tc, gap0: BCS_GAP_RATIO * K_B * tc, r_load: DEFAULT_LOAD_OHM })
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("tc", self.tc)?;
        ensure_positive("gap0", self.gap0)?;
        ensure_positive("r_load", self.r_load)?;
        Ok(())
    }
}

/// Detection efficiency of one count row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sde {
    /// Clamped at zero.
    pub value: f64,
    pub raw: f64,
    pub warning: Option<String>,
}

/// `(CR - DCR) / PR`, clamped at 0 when dark counts exceed the total.
pub fn sde(row: &CountRow, photon_rate: f64) -> Result<Sde> {
    ensure_positive("photon_rate_hz", photon_rate)?;
    let raw = (row.cr - row.dcr) / photon_rate;
    if raw < 0.0 {
        Ok(Sde {
            value: 0.0,
            raw,
            warning: Some(format!("negative SDE {raw} at bias {} uA clamped to 0 (DCR exceeds CR)", row.bias)),
        })
    } else {
        Ok(Sde { value: raw, raw, warning: None })
    }
}

/// `(bias uA, SDE)` pairs in sweep order.
pub type SdeCurve = Vec<(f64, f64)>;

/// `(bias, SDE)` pairs of a record, clamped, with clamp warnings.
pub fn sde_curve(rec: &DetectorRecord) -> Result<(SdeCurve, Vec<String>)> {
    let mut curve = Vec::with_capacity(rec.counts.len());
    let mut warnings = Vec::new();
    for row in &rec.counts {
        let s = sde(row, rec.photon_rate)?;
        warnings.extend(s.warning.map(|w| format!("detector {}: {w}", rec.id)));
        curve.push((row.bias, s.value));
    }
    Ok((curve, warnings))
}

/// `I_sw / (width (d0 - r_s F - oxide))`, A/m^2.
pub fn switching_current_density(rec: &DetectorRecord, p: &ModelParams, film: &FilmSpec) -> Result<f64> {
    let f = Fluence::new(rec.fluence)?;
    let conducting = effective_thickness(f, film, p)? - film.oxide;
    if !(conducting > 0.0) {
        return Err(Error::ThicknessExhausted {
            fluence: rec.fluence,
            limit: if p.r_s > 0.0 { (film.d0 - film.oxide) / p.r_s } else { f64::INFINITY },
        });
    }
    ensure_positive("width_nm", rec.width)?;
    Ok(rec.i_sw * UA / (rec.width * NM * conducting * NM))
}

/// Kinetic inductance `hbar R_sheet / (pi gap0) * l/w`, H.
pub fn kinetic_inductance(rec: &DetectorRecord, r_sheet: f64, mat: &MaterialParams) -> Result<f64> {
    ensure_positive("r_sheet_ohm", r_sheet)?;
    ensure_positive("width_nm", rec.width)?;
    mat.validate()?;
    kinetic_inductance_for_squares(r_sheet, rec.squares(), mat)
}

pub fn kinetic_inductance_for_squares(r_sheet: f64, squares: f64, mat: &MaterialParams) -> Result<f64> {
    ensure_positive("r_sheet_ohm", r_sheet)?;
    ensure_positive("squares", squares)?;
    Ok(HBAR * r_sheet / (PI * mat.gap0) * squares)
}

/// Dirty-limit bulk penetration depth `sqrt(hbar rho / (pi mu0 gap0))`, m,
/// for normal-state resistivity `rho` in ohm m.
pub fn penetration_depth(rho: f64, mat: &MaterialParams) -> Result<f64> {
    ensure_positive("resistivity", rho)?;
    Ok((HBAR * rho / (PI * MU_0 * mat.gap0)).sqrt())
}

/// Thin-film kinetic inductance `mu0 lambda^2 / d * l/w`, H, with `d` in m.
pub fn kinetic_inductance_from_penetration(lambda: f64, thickness: f64, squares: f64) -> Result<f64> {
    ensure_positive("penetration_depth", lambda)?;
    ensure_positive("thickness", thickness)?;
    Ok(MU_0 * lambda * lambda / thickness * squares)
}

/// `L_k / R_load`, s.
pub fn decay_time(l_k: f64, mat: &MaterialParams) -> Result<f64> {
    ensure_positive("kinetic_inductance", l_k)?;
    ensure_positive("r_load", mat.r_load)?;
    Ok(l_k / mat.r_load)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationOptions {
    /// Share of the bias range, counted down from the highest bias.
    pub window: f64,
    /// Largest relative SDE rise across the window that still counts as a plateau.
    pub threshold: f64,
}

impl Default for SaturationOptions {
    fn default() -> Self {
        SaturationOptions { window: 0.1, threshold: 0.02 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SaturationClass {
    #[serde(rename = "saturating")]
    Saturating,
    #[serde(rename = "non-saturating")]
    NonSaturating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Saturation {
    pub class: SaturationClass,
    /// `(SDE(top) - SDE(window start)) / SDE(top)`.
    pub relative_rise: f64,
}

/// Plateau test on an SDE-versus-bias curve.
pub fn classify_saturation(curve: &[(f64, f64)], opts: &SaturationOptions) -> Result<Saturation> {
    if curve.len() < 5 {
        return Err(Error::InsufficientData(format!("saturation needs at least 5 points, got {}", curve.len())));
    }
    if curve.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::invalid("bias_uA", "must be strictly increasing"));
    }
    if !(opts.window > 0.0 && opts.window < 1.0) || !(opts.threshold > 0.0) {
        return Err(Error::invalid("saturation options", "window must lie in (0, 1) and threshold be > 0"));
    }
    let (b_min, b_max) = (curve[0].0, curve[curve.len() - 1].0);
    let start = b_max - opts.window * (b_max - b_min);
    let i = curve.partition_point(|&(b, _)| b <= start).clamp(1, curve.len() - 1);
    let (b0, s0) = curve[i - 1];
    let (b1, s1) = curve[i];
    let s_start = s0 + (start - b0) / (b1 - b0) * (s1 - s0);
    let s_top = curve[curve.len() - 1].1;
    let relative_rise = if s_top > 0.0 { (s_top - s_start) / s_top } else { f64::INFINITY };
    let class = if relative_rise < opts.threshold { SaturationClass::Saturating } else { SaturationClass::NonSaturating };
    Ok(Saturation { class, relative_rise })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionRow {
    pub d0: f64,
    pub width: f64,
    pub width_sigma: f64,
    pub n: f64,
    pub k: f64,
    /// Absorbed fraction, percent.
    pub alpha_percent: f64,
}

/// Simulated optical absorption per film thickness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionTable {
    pub rows: Vec<AbsorptionRow>,
}

impl AbsorptionTable {
    pub fn new(rows: Vec<AbsorptionRow>) -> Result<Self> {
        for r in &rows {
            if !(r.alpha_percent > 0.0 && r.alpha_percent < 100.0) {
                return Err(Error::invalid("alpha_percent", format!("must lie in (0, 100), got {}", r.alpha_percent)));
            }
        }
        Ok(AbsorptionTable { rows })
    }

    /// The table shipped with the crate.
    pub fn bundled() -> Self {
        crate::io::parse_absorption(ABSORPTION_CSV, "absorption.csv").expect("bundled absorption table is valid")
    }

    pub fn for_thickness(&self, d0: f64) -> Option<&AbsorptionRow> {
        self.rows.iter().find(|r| (r.d0 - d0).abs() < 1e-9)
    }
}

/// Film Tc measured on a test structure irradiated alongside the detectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilmTc {
    pub d0: f64,
    pub fluence: f64,
    pub tc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcSdeRow {
    pub id: String,
    pub d0: f64,
    pub fluence: f64,
    pub tc: f64,
    /// Highest SDE over the bias sweep.
    pub sde: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TcSdeReport {
    pub rows: Vec<TcSdeRow>,
    pub warnings: Vec<String>,
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Pairs each detector's best SDE with the film Tc at the same thickness
/// and fluence.
pub fn tc_sde_join(detectors: &[DetectorRecord], films: &[FilmTc], absorption: &AbsorptionTable) -> Result<TcSdeReport> {
    let mut report = TcSdeReport::default();
    for d in detectors {
        let Some(film) = films.iter().find(|f| same(f.d0, d.d0) && same(f.fluence, d.fluence)) else {
            report.warnings.push(format!("detector {}: no film Tc at d0={} nm, F={} ions/nm^2", d.id, d.d0, d.fluence));
            continue;
        };
        let (curve, mut warnings) = sde_curve(d)?;
        let Some(best) = curve.iter().map(|c| c.1).reduce(f64::max) else {
            report.warnings.push(format!("detector {}: no count data", d.id));
            continue;
        };
        warnings.extend(absorption_warning(&d.id, d.d0, best, absorption));
        report.rows.push(TcSdeRow { id: d.id.clone(), d0: d.d0, fluence: d.fluence, tc: film.tc, sde: best, warnings });
    }
    Ok(report)
}

/// Warning when an SDE exceeds the simulated absorption for its thickness.
pub fn absorption_warning(id: &str, d0: f64, sde: f64, table: &AbsorptionTable) -> Option<String> {
    let row = table.for_thickness(d0)?;
    (sde * 100.0 > row.alpha_percent).then(|| {
        format!(
            "detector {id}: SDE {:.1}% exceeds the simulated absorption {}% for {d0} nm (physically inconsistent)",
            sde * 100.0,
            row.alpha_percent
        )
    })
}

/// Formats a fraction and its uncertainty as `"55.3 ± 1.1%"`, keeping two
/// significant digits of the uncertainty.
pub fn format_percent_with_uncertainty(value: f64, sigma: f64) -> String {
    let (v, s) = (value * 100.0, sigma.abs() * 100.0);
    let decimals = if s > 0.0 { (1 - s.log10().floor() as i32).max(0) as usize } else { 1 };
    format!("{v:.decimals$} ± {s:.decimals$}%")
}

/// Every metric for one detector under the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorMetrics {
    pub id: String,
    pub d0_nm: f64,
    pub fluence_per_nm2: f64,
    pub r_sheet_ohm: f64,
    pub tc_k: f64,
    pub squares: f64,
    pub jsw_a_per_m2: f64,
    pub lk_h: f64,
    pub tau_s: f64,
    pub sde_max: Option<f64>,
    pub saturation: Option<Saturation>,
    pub warnings: Vec<String>,
}

/// Evaluates [`DetectorMetrics`] for each record; output order follows input.
pub fn evaluate_detectors(
    detectors: &[DetectorRecord],
    p: &ModelParams,
    absorption: &AbsorptionTable,
    saturation: &SaturationOptions,
) -> Result<Vec<DetectorMetrics>> {
    detectors
        .par_iter()
        .map(|rec| {
            rec.validate()?;
            let film = FilmSpec::new(rec.d0)?;
            let f = Fluence::new(rec.fluence)?;
            let r_sheet = sheet_resistance(f, &film, p)?;
            let tc = tc_vs_fluence(f, &film, p)?;
            let mat = MaterialParams::bcs(tc)?;
            let lk = kinetic_inductance(rec, r_sheet, &mat)?;
            let (curve, mut warnings) = sde_curve(rec)?;
            let sde_max = curve.iter().map(|c| c.1).reduce(f64::max);
            if let Some(s) = sde_max {
                warnings.extend(absorption_warning(&rec.id, rec.d0, s, absorption));
            }
            let saturation = if curve.len() >= 5 { Some(classify_saturation(&curve, saturation)?) } else { None };
            Ok(DetectorMetrics {
                id: rec.id.clone(),
                d0_nm: rec.d0,
                fluence_per_nm2: rec.fluence,
                r_sheet_ohm: r_sheet,
                tc_k: tc,
                squares: rec.squares(),
                jsw_a_per_m2: switching_current_density(rec, p, &film)?,
                lk_h: lk,
                tau_s: decay_time(lk, &mat)?,
                sde_max,
                saturation,
                warnings,
            })
        })
        .collect()
}
