//! Fluence needed to move a film or detector metric to a target value.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{BCS_GAP_RATIO, CALIBRATED_MAX_FLUENCE, DEFAULT_LOAD_OHM, EXTRAPOLATION_FACTOR, HBAR, K_B, NM, UA};
use crate::detector::DetectorRecord;
use crate::error::{Error, Result};
use crate::model::{sheet_resistance, tc_vs_fluence, thickness_limit, FilmSpec, Fluence, ModelParams};
use crate::numeric::{bisect, BisectTol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// Sheet resistance, ohm.
    TargetRSheet,
    /// Critical temperature, K.
    TargetTc,
    /// Decay time, s.
    TargetTau,
    /// Switching-current density, A/m^2.
    TargetJsw,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::TargetRSheet => "target_r_sheet",
            MetricKind::TargetTc => "target_tc",
            MetricKind::TargetTau => "target_tau",
            MetricKind::TargetJsw => "target_jsw",
        }
    }

    pub fn needs_detector(self) -> bool {
        matches!(self, MetricKind::TargetTau | MetricKind::TargetJsw)
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim_start_matches("target_") {
            "r_sheet" => MetricKind::TargetRSheet,
            "tc" => MetricKind::TargetTc,
            "tau" => MetricKind::TargetTau,
            "jsw" => MetricKind::TargetJsw,
            _ => return Err(Error::invalid("kind", format!("unknown metric `{s}` (r_sheet, tc, tau, jsw)"))),
        })
    }
}

/// What is being irradiated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Device {
    Film(FilmSpec),
    Detector(DetectorRecord),
}

impl Device {
    fn film(&self) -> Result<FilmSpec> {
        match self {
            Device::Film(f) => Ok(*f),
            Device::Detector(d) => FilmSpec::new(d.d0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoseTarget {
    pub kind: MetricKind,
    pub value: f64,
    pub device: Device,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanOptions {
    /// Upper end of the search interval, ions/nm^2. The thickness limit
    /// always caps it.
    pub f_max: f64,
    /// Fixed gap for decay-time targets, J; by default the gap follows the
    /// model Tc at each fluence.
    pub gap0: Option<f64>,
    pub r_load: f64,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions { f_max: EXTRAPOLATION_FACTOR * CALIBRATED_MAX_FLUENCE, gap0: None, r_load: DEFAULT_LOAD_OHM }
    }
}

/// The forward map `F -> metric` for one device under one parameter set.
struct Forward<'a> {
    kind: MetricKind,
    film: FilmSpec,
    detector: Option<&'a DetectorRecord>,
    p: &'a ModelParams,
    opts: &'a PlanOptions,
    /// Switching current for density targets, A.
    i_sw: f64,
}

impl<'a> Forward<'a> {
    fn new(kind: MetricKind, device: &'a Device, p: &'a ModelParams, opts: &'a PlanOptions) -> Result<Self> {
        let detector = match device {
            Device::Detector(d) => {
                d.validate()?;
                Some(d)
            }
            Device::Film(_) => None,
        };
        if kind.needs_detector() && detector.is_none() {
            return Err(Error::invalid("device", format!("{} needs a detector record", kind.name())));
        }
        Ok(Forward { kind, film: device.film()?, detector, p, opts, i_sw: detector.map_or(0.0, |d| d.i_sw * UA) })
    }

    /// Largest fluence at which the metric is defined and the search may go.
    fn f_max(&self) -> f64 {
        let limit = match self.kind {
            MetricKind::TargetJsw if self.p.r_s > 0.0 => (self.film.d0 - self.film.oxide) / self.p.r_s,
            _ => thickness_limit(&self.film, self.p),
        };
        self.opts.f_max.min(limit * (1.0 - 1e-9))
    }

    fn eval(&self, f: f64) -> Result<f64> {
        let fl = Fluence::new(f)?;
        match self.kind {
            MetricKind::TargetRSheet => sheet_resistance(fl, &self.film, self.p),
            MetricKind::TargetTc => tc_vs_fluence(fl, &self.film, self.p),
            MetricKind::TargetTau => {
                let det = self.detector.expect("checked in new");
                let r = sheet_resistance(fl, &self.film, self.p)?;
                let gap = match self.opts.gap0 {
                    Some(g) => g,
                    None => BCS_GAP_RATIO * K_B * tc_vs_fluence(fl, &self.film, self.p)?,
                };
                Ok(HBAR * r * det.squares() / (std::f64::consts::PI * gap * self.opts.r_load))
            }
            MetricKind::TargetJsw => {
                let det = self.detector.expect("checked in new");
                let conducting = self.film.d0 - self.p.r_s * f - self.film.oxide;
                if !(conducting > 0.0) {
                    return Err(Error::ThicknessExhausted { fluence: f, limit: self.f_max() });
                }
                Ok(self.i_sw / (det.width * NM * conducting * NM))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DosePlan {
    /// ions/nm^2
    pub fluence: f64,
    /// Metric value at `fluence`.
    pub achieved: f64,
    /// Fluence beyond the calibrated range.
    pub extrapolated: bool,
    pub warnings: Vec<String>,
}

const MONOTONE_SAMPLES: usize = 64;

fn solve(fwd: &Forward<'_>, target: f64) -> Result<DosePlan> {
    if !target.is_finite() {
        return Err(Error::invalid("value", "target must be finite"));
    }
    let f_max = fwd.f_max();
    let m0 = fwd.eval(0.0)?;
    let m1 = fwd.eval(f_max)?;
    let rising = m1 > m0;
    if m1 == m0 {
        return Err(Error::NotMonotone { f_max });
    }
    let mut prev = m0;
    for i in 1..=MONOTONE_SAMPLES {
        let m = fwd.eval(f_max * i as f64 / MONOTONE_SAMPLES as f64)?;
        if (m > prev) != rising || m == prev {
            return Err(Error::NotMonotone { f_max });
        }
        prev = m;
    }
    let (low, high) = if rising { (m0, m1) } else { (m1, m0) };
    if !(target >= low && target <= high) {
        return Err(Error::Unreachable { target, low, high });
    }

    let fluence = if target == m0 {
        0.0
    } else if target == m1 {
        f_max
    } else {
        let tol = BisectTol { x_rel: 1e-15, f_abs: 1e-11 * target.abs(), max_iter: 4000 };
        bisect(|f| Ok(fwd.eval(f)? - target), 0.0, f_max, tol)?
    };
    let achieved = fwd.eval(fluence)?;
    let extrapolated = fluence > CALIBRATED_MAX_FLUENCE;
    let warnings = if extrapolated {
        vec![format!("planned fluence {fluence} ions/nm^2 is beyond the calibrated {CALIBRATED_MAX_FLUENCE} ions/nm^2")]
    } else {
        Vec::new()
    };
    Ok(DosePlan { fluence, achieved, extrapolated, warnings })
}

/// Fluence at which the metric reaches `target.value`, by bisection on
/// `[0, F_max]`.
pub fn plan_dose(target: &DoseTarget, p: &ModelParams, opts: &PlanOptions) -> Result<DosePlan> {
    solve(&Forward::new(target.kind, &target.device, p, opts)?, target.value)
}

/// Forward metric at one fluence; the map that [`plan_dose`] inverts.
pub fn metric_at(kind: MetricKind, device: &Device, fluence: f64, p: &ModelParams, opts: &PlanOptions) -> Result<f64> {
    Forward::new(kind, device, p, opts)?.eval(fluence)
}

/// A device with its metric measured before irradiation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimDevice {
    pub id: String,
    pub device: Device,
    /// Measured metric at zero fluence, in the metric's units.
    pub anchor: f64,
}

/// One line of a plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRow {
    pub id: String,
    pub fluence_per_nm2: f64,
    pub predicted_metric: f64,
    pub extrapolated: bool,
    /// Empty when the plan is clean.
    pub warning: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimPlan {
    pub kind: MetricKind,
    pub target: f64,
    pub rows: Vec<PlanRow>,
    pub warnings: Vec<String>,
}

/// Parameters and device adjusted so the model reproduces `anchor` at zero
/// fluence. Resistance-like metrics rescale `a_over_vD`; a density anchor
/// fixes the implied switching current.
fn anchored(
    kind: MetricKind,
    device: &Device,
    anchor: f64,
    p: &ModelParams,
    opts: &PlanOptions,
) -> Result<(ModelParams, Device)> {
    if !(anchor > 0.0 && anchor.is_finite()) {
        return Err(Error::NonPositiveInput { field: "anchor", value: anchor });
    }
    let model0 = metric_at(kind, device, 0.0, p, opts)?;
    let mut q = p.clone();
    let mut dev = device.clone();
    if anchor == model0 {
        return Ok((q, dev));
    }
    let ratio = anchor / model0;
    match kind {
        // R is proportional to the scale s.
        MetricKind::TargetRSheet => q.resistance_scale *= ratio,
        // Tc ~ R^-B.
        MetricKind::TargetTc => q.resistance_scale *= ratio.powf(-1.0 / p.scaling_b),
        // tau ~ R / gap with gap ~ Tc ~ R^-B, or tau ~ R for a fixed gap.
        MetricKind::TargetTau => {
            let exponent = if opts.gap0.is_some() { 1.0 } else { 1.0 + p.scaling_b };
            q.resistance_scale *= ratio.powf(1.0 / exponent);
        }
        MetricKind::TargetJsw => {
            if let Device::Detector(d) = &mut dev {
                d.i_sw *= ratio;
            }
        }
    }
    Ok((q, dev))
}

/// Per-device fluences that bring every device to the same target.
///
/// Irradiation only moves metrics one way, so devices already past the
/// target (or unable to reach it) get fluence 0 and a warning.
pub fn trim_plan(devices: &[TrimDevice], kind: MetricKind, target: f64, p: &ModelParams, opts: &PlanOptions) -> TrimPlan {
    let rows: Vec<PlanRow> = devices
        .par_iter()
        .map(|d| {
            let planned = anchored(kind, &d.device, d.anchor, p, opts).and_then(|(q, dev)| {
                let fwd = Forward::new(kind, &dev, &q, opts)?;
                let plan = solve(&fwd, target);
                Ok((plan, fwd.eval(0.0)?))
            });
            match planned {
                Ok((Ok(plan), _)) => PlanRow {
                    id: d.id.clone(),
                    fluence_per_nm2: plan.fluence,
                    predicted_metric: plan.achieved,
                    extrapolated: plan.extrapolated,
                    warning: plan.warnings.join("; "),
                },
                Ok((Err(e), at_zero)) => PlanRow {
                    id: d.id.clone(),
                    fluence_per_nm2: 0.0,
                    predicted_metric: at_zero,
                    extrapolated: false,
                    warning: format!("{}: {e}", e.kind()),
                },
                Err(e) => PlanRow {
                    id: d.id.clone(),
                    fluence_per_nm2: 0.0,
                    predicted_metric: f64::NAN,
                    extrapolated: false,
                    warning: format!("{}: {e}", e.kind()),
                },
            }
        })
        .collect();
    let warnings = rows.iter().filter(|r| !r.warning.is_empty()).map(|r| format!("device {}: {}", r.id, r.warning)).collect();
    TrimPlan { kind, target, rows, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::DetectorRecord;
    use proptest::prelude::*;

    fn film(d0: f64) -> Device {
        Device::Film(FilmSpec::new(d0).unwrap())
    }

    fn detector(d0: f64) -> Device {
        Device::Detector(DetectorRecord {
            id: "x".into(),
            d0,
            fluence: 0.0,
            width: 100.0,
            fill_factor: 0.5,
            area_side: 10.0,
            wire_length: None,
            i_sw: 39.2,
            counts: vec![],
            photon_rate: 1e6,
        })
    }

    fn plan(kind: MetricKind, value: f64, device: Device) -> Result<DosePlan> {
        plan_dose(&DoseTarget { kind, value, device }, &ModelParams::published(), &PlanOptions::default())
    }

    #[test]
    fn r_sheet_targets() {
        let p = ModelParams::published();
        let r0 = sheet_resistance(Fluence::ZERO, &FilmSpec::new(10.0).unwrap(), &p).unwrap();
        assert_eq!(plan(MetricKind::TargetRSheet, r0, film(10.0)).unwrap().fluence, 0.0);
        let f = plan(MetricKind::TargetRSheet, 288.4, film(10.0)).unwrap().fluence;
        assert!((f - 1000.0).abs() < 1.0, "{f}");
    }

    #[test]
    fn tc_targets() {
        let p = ModelParams::published();
        let tc0 = tc_vs_fluence(Fluence::ZERO, &FilmSpec::new(10.0).unwrap(), &p).unwrap();
        assert_eq!(plan(MetricKind::TargetTc, tc0, film(10.0)).unwrap().fluence, 0.0);
        // 8.75 K sits just below the unirradiated 8.7566 K.
        let f = plan(MetricKind::TargetTc, 8.75, film(10.0)).unwrap().fluence;
        assert!(f > 0.0 && f < 1.0, "{f}");
    }

    #[test]
    fn unreachable_is_never_clamped() {
        assert!(matches!(plan(MetricKind::TargetRSheet, 100.0, film(10.0)), Err(Error::Unreachable { .. })));
        assert!(matches!(plan(MetricKind::TargetTc, 12.0, film(10.0)), Err(Error::Unreachable { .. })));
        assert!(matches!(plan(MetricKind::TargetRSheet, 1e9, film(10.0)), Err(Error::Unreachable { .. })));
    }

    #[test]
    fn detector_metrics_need_a_detector() {
        assert!(matches!(plan(MetricKind::TargetTau, 5e-9, film(10.0)), Err(Error::InvalidInput { .. })));
        let tau0 = metric_at(MetricKind::TargetTau, &detector(10.0), 0.0, &ModelParams::published(), &PlanOptions::default()).unwrap();
        let pl = plan(MetricKind::TargetTau, tau0 * 1.2, detector(10.0)).unwrap();
        assert!(((pl.achieved - tau0 * 1.2) / (tau0 * 1.2)).abs() < 1e-9);
        let j0 = metric_at(MetricKind::TargetJsw, &detector(10.0), 0.0, &ModelParams::published(), &PlanOptions::default()).unwrap();
        let pl = plan(MetricKind::TargetJsw, j0 * 1.05, detector(10.0)).unwrap();
        assert!(pl.fluence > 0.0);
    }

    #[test]
    fn extrapolation_is_flagged() {
        let p = ModelParams::published();
        let r = sheet_resistance(Fluence::new(3000.0).unwrap(), &FilmSpec::new(10.0).unwrap(), &p).unwrap();
        let pl = plan(MetricKind::TargetRSheet, r, film(10.0)).unwrap();
        assert!(pl.extrapolated && !pl.warnings.is_empty());
        assert!((pl.fluence - 3000.0).abs() < 1e-6);
    }

    #[test]
    fn flat_model_is_not_monotone() {
        let mut p = ModelParams::published();
        p.eta_vd23 = 0.0;
        p.r_s = 0.0;
        let t = DoseTarget { kind: MetricKind::TargetRSheet, value: 200.0, device: film(10.0) };
        assert!(matches!(plan_dose(&t, &p, &PlanOptions::default()), Err(Error::NotMonotone { .. })));
    }

    fn trim(id: &str, anchor: f64) -> TrimDevice {
        TrimDevice { id: id.into(), device: film(10.0), anchor }
    }

    #[test]
    fn trim_identical_devices_at_target() {
        let p = ModelParams::published();
        let r0 = sheet_resistance(Fluence::ZERO, &FilmSpec::new(10.0).unwrap(), &p).unwrap();
        let out = trim_plan(&[trim("a", r0), trim("b", r0)], MetricKind::TargetRSheet, r0, &p, &PlanOptions::default());
        assert!(out.rows.iter().all(|r| r.fluence_per_nm2 == 0.0 && r.warning.is_empty()));
    }

    #[test]
    fn trim_orders_devices_by_anchor() {
        let p = ModelParams::published();
        let out = trim_plan(&[trim("1", 250.0), trim("2", 270.0)], MetricKind::TargetRSheet, 300.0, &p, &PlanOptions::default());
        let (f1, f2) = (out.rows[0].fluence_per_nm2, out.rows[1].fluence_per_nm2);
        assert!(f1 > f2 && f2 > 0.0, "{f1} {f2}");
        for r in &out.rows {
            assert!((r.predicted_metric - 300.0).abs() < 300.0 * 1e-9);
        }
    }

    #[test]
    fn trim_device_past_target_gets_zero_and_warning() {
        let p = ModelParams::published();
        let out = trim_plan(&[trim("hi", 320.0)], MetricKind::TargetRSheet, 300.0, &p, &PlanOptions::default());
        assert_eq!(out.rows[0].fluence_per_nm2, 0.0);
        assert!(out.rows[0].warning.starts_with("Unreachable"));
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn zero_offset_trim_equals_plan_dose() {
        let p = ModelParams::published();
        let opts = PlanOptions::default();
        for kind in [MetricKind::TargetRSheet, MetricKind::TargetTc, MetricKind::TargetTau, MetricKind::TargetJsw] {
            let dev = detector(8.0);
            let m0 = metric_at(kind, &dev, 0.0, &p, &opts).unwrap();
            let m1 = metric_at(kind, &dev, 700.0, &p, &opts).unwrap();
            let t = TrimDevice { id: "z".into(), device: dev.clone(), anchor: m0 };
            let row = &trim_plan(&[t], kind, m1, &p, &opts).rows[0];
            let direct = plan_dose(&DoseTarget { kind, value: m1, device: dev }, &p, &opts).unwrap();
            assert_eq!(row.fluence_per_nm2, direct.fluence, "{kind:?}");
        }
    }

    #[test]
    fn anchors_pass_through_measured_point() {
        let p = ModelParams::published();
        let opts = PlanOptions::default();
        for kind in [MetricKind::TargetRSheet, MetricKind::TargetTc, MetricKind::TargetTau, MetricKind::TargetJsw] {
            let dev = detector(12.0);
            let m0 = metric_at(kind, &dev, 0.0, &p, &opts).unwrap();
            let anchor = m0 * 1.03;
            let (q, d) = anchored(kind, &dev, anchor, &p, &opts).unwrap();
            let at_zero = metric_at(kind, &d, 0.0, &q, &opts).unwrap();
            assert!(((at_zero - anchor) / anchor).abs() < 1e-12, "{kind:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn round_trip(u in 0.0f64..1.0, d0 in prop::sample::select(vec![8.0, 10.0, 12.0])) {
            let p = ModelParams::published();
            let opts = PlanOptions::default();
            for kind in [MetricKind::TargetRSheet, MetricKind::TargetTc] {
                let dev = film(d0);
                let a = metric_at(kind, &dev, 0.0, &p, &opts).unwrap();
                let b = metric_at(kind, &dev, opts.f_max, &p, &opts).unwrap();
                let target = a + u * (b - a);
                let pl = plan_dose(&DoseTarget { kind, value: target, device: dev.clone() }, &p, &opts).unwrap();
                let back = metric_at(kind, &dev, pl.fluence, &p, &opts).unwrap();
                prop_assert!(((back - target) / target).abs() <= 1e-9);
            }
        }

        #[test]
        fn larger_resistance_needs_more_fluence(a in 207.0f64..370.0, b in 207.0f64..370.0) {
            let fa = plan(MetricKind::TargetRSheet, a.min(b), film(10.0)).unwrap().fluence;
            let fb = plan(MetricKind::TargetRSheet, a.max(b), film(10.0)).unwrap().fluence;
            prop_assert!(fa <= fb);
        }
    }
}
