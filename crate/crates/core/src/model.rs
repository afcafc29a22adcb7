//! Closed-form model of sheet resistance and critical temperature versus
//! helium-ion fluence.
//!
//! Each ion crossing the film creates defect clusters of volume `v_D` with
//! efficiency `η`, but only in volume elements that are still free. The
//! occupied volume fraction `f = n_D v_D` therefore obeys
//!
//! ```text
//! df/dF = η v_D^(2/3) (1 - f),    f(0) = n_D0 v_D
//! f(F)  = 1 - (1 - n_D0 v_D) exp(-η v_D^(2/3) F)
//! ```
//!
//! Resistivity is proportional to `f` and surface sputtering thins the film
//! at rate `r_s`, giving
//!
//! ```text
//! R_sheet(F) = f(F) * (a_d0 / v_D) / (d0 - r_s F)
//! ```
//!
//! The critical temperature follows from the thickness/resistance scaling
//! law `d0 Tc = A R_sheet^(-B)`, always evaluated with the nominal `d0`.
//!
//! Units: nm for lengths, ions/nm^2 for fluence, ohm, kelvin.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constants::{CALIBRATED_MAX_FLUENCE, EXTRAPOLATION_FACTOR, IONS_PER_CM2_PER_NM2, NATIVE_OXIDE_NM};
use crate::error::{Error, Result};

/// Areal helium-ion dose in ions/nm^2.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Fluence(f64);

impl Fluence {
    pub const ZERO: Fluence = Fluence(0.0);

    pub fn new(per_nm2: f64) -> Result<Self> {
        if per_nm2 >= 0.0 && per_nm2.is_finite() {
            Ok(Fluence(per_nm2))
        } else {
            Err(Error::invalid("fluence", format!("must be finite and >= 0, got {per_nm2}")))
        }
    }

    pub fn from_per_cm2(per_cm2: f64) -> Result<Self> {
        Self::new(per_cm2 / IONS_PER_CM2_PER_NM2)
    }

    #[inline]
    pub fn per_nm2(self) -> f64 {
        self.0
    }

    pub fn per_cm2(self) -> f64 {
        self.0 * IONS_PER_CM2_PER_NM2
    }
}

impl TryFrom<f64> for Fluence {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Fluence::new(v)
    }
}

impl From<Fluence> for f64 {
    fn from(f: Fluence) -> f64 {
        f.0
    }
}

impl fmt::Display for Fluence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ions/nm^2", self.0)
    }
}

/// Nominal film geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilmSpec {
    /// Nominal (as-deposited) thickness, nm.
    pub d0: f64,
    /// Native oxide thickness, nm.
    pub oxide: f64,
}

impl FilmSpec {
    pub fn new(d0: f64) -> Result<Self> {
        Self::with_oxide(d0, NATIVE_OXIDE_NM)
    }

    pub fn with_oxide(d0: f64, oxide: f64) -> Result<Self> {
        if !(oxide >= 0.0 && oxide.is_finite()) {
            return Err(Error::invalid("oxide", format!("must be >= 0, got {oxide}")));
        }
        if !(d0 > oxide && d0.is_finite()) {
            return Err(Error::invalid(
                "d0",
                format!("must exceed the oxide thickness {oxide} nm, got {d0}"),
            ));
        }
        Ok(FilmSpec { d0, oxide })
    }
}

/// Fitted constants of the resistance model plus the scaling-law constants.
///
/// `a_over_vd` is keyed by nominal thickness in whole nanometres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsFile", into = "ParamsFile")]
pub struct ModelParams {
    /// Per-thickness resistance scale `a_d0 / v_D`, ohm.
    pub a_over_vd: BTreeMap<u32, f64>,
    /// Initially occupied volume fraction `n_D0 v_D`.
    pub nd0_vd: f64,
    /// Defect-creation cross section `η v_D^(2/3)`, nm^2.
    pub eta_vd23: f64,
    /// Sputter rate, nm per (ion/nm^2).
    pub r_s: f64,
    /// Scaling-law prefactor `A` (nm, K, ohm units).
    pub scaling_a: f64,
    /// Scaling-law exponent `B`.
    pub scaling_b: f64,
    /// Multiplies every `a_over_vd` entry. Used for per-device anchoring.
    pub resistance_scale: f64,
    /// Resolve uncalibrated thicknesses by log-linear interpolation.
    pub interpolate_thickness: bool,
}

impl ModelParams {
    /// The published calibration for 8, 10 and 12 nm NbTiN.
    pub fn published() -> Self {
        ModelParams {
            a_over_vd: BTreeMap::from([(8, 2957.0), (10, 2618.0), (12, 2484.0)]),
            nd0_vd: 0.79,
            eta_vd23: 4.7e-3,
            r_s: 9.4e-4,
            scaling_a: 1.44e4,
            scaling_b: 0.957,
            resistance_scale: 1.0,
            interpolate_thickness: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.a_over_vd.is_empty() {
            return Err(Error::invalid("a_over_vD", "at least one thickness is required"));
        }
        for (&d, &a) in &self.a_over_vd {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::invalid(format!("a_over_vD[{d}]"), format!("must be > 0, got {a}")));
            }
        }
        if !(self.nd0_vd > 0.0 && self.nd0_vd <= 1.0) {
            return Err(Error::invalid("nD0_vD", format!("must lie in (0, 1], got {}", self.nd0_vd)));
        }
        if !(self.eta_vd23 > 0.0 && self.eta_vd23.is_finite()) {
            return Err(Error::invalid("eta_vD23", format!("must be > 0, got {}", self.eta_vd23)));
        }
        if !(self.r_s >= 0.0 && self.r_s.is_finite()) {
            return Err(Error::invalid("r_s", format!("must be >= 0, got {}", self.r_s)));
        }
        if !(self.scaling_a > 0.0 && self.scaling_a.is_finite()) {
            return Err(Error::invalid("A", format!("must be > 0, got {}", self.scaling_a)));
        }
        if !(self.scaling_b > 0.0 && self.scaling_b.is_finite()) {
            return Err(Error::invalid("B", format!("must be > 0, got {}", self.scaling_b)));
        }
        if !(self.resistance_scale > 0.0 && self.resistance_scale.is_finite()) {
            return Err(Error::invalid("resistance_scale", "must be > 0"));
        }
        Ok(())
    }

    /// Resistance scale `a_d0 / v_D` for a nominal thickness, including
    /// `resistance_scale`.
    pub fn a_over_vd_for(&self, d0: f64) -> Result<f64> {
        let exact = d0.round();
        if (d0 - exact).abs() <= 1e-9 * d0.abs().max(1.0) && exact >= 0.0 && exact <= u32::MAX as f64 {
            if let Some(a) = self.a_over_vd.get(&(exact as u32)) {
                return Ok(a * self.resistance_scale);
            }
        }
        if self.interpolate_thickness {
            let below = self.a_over_vd.iter().rev().find(|(&d, _)| (d as f64) <= d0);
            let above = self.a_over_vd.iter().find(|(&d, _)| (d as f64) >= d0);
            if let (Some((&d_lo, &a_lo)), Some((&d_hi, &a_hi))) = (below, above) {
                if d_lo != d_hi {
                    let t = (d0 - d_lo as f64) / (d_hi as f64 - d_lo as f64);
                    let ln_a = (1.0 - t) * a_lo.ln() + t * a_hi.ln();
                    return Ok(ln_a.exp() * self.resistance_scale);
                }
            }
        }
        Err(Error::UnknownThickness { d0 })
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let file: ParamsFile =
            toml::from_str(s).map_err(|e| Error::invalid("params", e.to_string()))?;
        ModelParams::try_from(file)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&ParamsFile::from(self.clone())).expect("parameter file serializes")
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::published()
    }
}

/// On-disk layout of [`ModelParams`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    resistance: ResistanceSection,
    scaling: ScalingSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct ResistanceSection {
    nD0_vD: f64,
    eta_vD23: f64,
    r_s: f64,
    #[serde(with = "thickness_keys")]
    a_over_vD: BTreeMap<u32, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct ScalingSection {
    A: f64,
    B: f64,
}

impl TryFrom<ParamsFile> for ModelParams {
    type Error = Error;
    fn try_from(f: ParamsFile) -> Result<Self> {
        let p = ModelParams {
            a_over_vd: f.resistance.a_over_vD,
            nd0_vd: f.resistance.nD0_vD,
            eta_vd23: f.resistance.eta_vD23,
            r_s: f.resistance.r_s,
            scaling_a: f.scaling.A,
            scaling_b: f.scaling.B,
            resistance_scale: 1.0,
            interpolate_thickness: false,
        };
        p.validate()?;
        Ok(p)
    }
}

impl From<ModelParams> for ParamsFile {
    fn from(p: ModelParams) -> Self {
        let scale = p.resistance_scale;
        ParamsFile {
            resistance: ResistanceSection {
                nD0_vD: p.nd0_vd,
                eta_vD23: p.eta_vd23,
                r_s: p.r_s,
                a_over_vD: p.a_over_vd.into_iter().map(|(d, a)| (d, a * scale)).collect(),
            },
            scaling: ScalingSection {
                A: p.scaling_a,
                B: p.scaling_b,
            },
        }
    }
}

/// TOML and JSON object keys are strings; thicknesses are whole nanometres.
mod thickness_keys {
    use serde::de::Error as _;
    use serde::ser::SerializeMap;
    use serde::{Deserialize, Deserializer, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(map: &BTreeMap<u32, f64>, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(map.len()))?;
        for (k, v) in map {
            m.serialize_entry(&k.to_string(), v)?;
        }
        m.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u32, f64>, D::Error> {
        let raw = BTreeMap::<String, f64>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| {
                k.trim()
                    .parse::<u32>()
                    .map(|k| (k, v))
                    .map_err(|_| D::Error::custom(format!("a_over_vD key `{k}` is not an integer thickness in nm")))
            })
            .collect()
    }
}

/// Occupied volume fraction `n_D v_D` after fluence `f`.
pub fn defect_fraction(f: Fluence, p: &ModelParams) -> f64 {
    1.0 - (1.0 - p.nd0_vd) * (-p.eta_vd23 * f.per_nm2()).exp()
}

/// Fluence at which sputtering removes the whole nominal thickness.
pub fn thickness_limit(film: &FilmSpec, p: &ModelParams) -> f64 {
    if p.r_s > 0.0 {
        film.d0 / p.r_s
    } else {
        f64::INFINITY
    }
}

/// Film thickness remaining after sputtering, nm.
pub fn effective_thickness(f: Fluence, film: &FilmSpec, p: &ModelParams) -> Result<f64> {
    let d = film.d0 - p.r_s * f.per_nm2();
    if d > 0.0 {
        Ok(d)
    } else {
        Err(Error::ThicknessExhausted {
            fluence: f.per_nm2(),
            limit: thickness_limit(film, p),
        })
    }
}

/// Normal-state sheet resistance, ohm.
pub fn sheet_resistance(f: Fluence, film: &FilmSpec, p: &ModelParams) -> Result<f64> {
    let a = p.a_over_vd_for(film.d0)?;
    let d_eff = effective_thickness(f, film, p)?;
    Ok(defect_fraction(f, p) * a / d_eff)
}

/// Critical temperature from the scaling law `d0 Tc = A R^(-B)`, K.
pub fn tc_from_scaling(r_sheet: f64, film: &FilmSpec, p: &ModelParams) -> Result<f64> {
    if !(r_sheet > 0.0) {
        return Err(Error::NonPositiveResistance(r_sheet));
    }
    Ok(p.scaling_a * r_sheet.powf(-p.scaling_b) / film.d0)
}

/// Inverse of [`tc_from_scaling`]: the sheet resistance that gives `tc`.
pub fn r_sheet_for_tc(tc: f64, film: &FilmSpec, p: &ModelParams) -> Result<f64> {
    if !(tc > 0.0) {
        return Err(Error::NonPositiveInput { field: "tc", value: tc });
    }
    Ok((p.scaling_a / (film.d0 * tc)).powf(1.0 / p.scaling_b))
}

/// Critical temperature after fluence `f`: the resistance model fed into
/// the scaling law.
pub fn tc_vs_fluence(f: Fluence, film: &FilmSpec, p: &ModelParams) -> Result<f64> {
    tc_from_scaling(sheet_resistance(f, film, p)?, film, p)
}

/// Warning text for fluences beyond the validated range, if any.
pub fn extrapolation_warning(f: Fluence) -> Option<String> {
    let limit = EXTRAPOLATION_FACTOR * CALIBRATED_MAX_FLUENCE;
    (f.per_nm2() > limit).then(|| {
        format!(
            "fluence {} ions/nm^2 exceeds {limit} ions/nm^2 ({EXTRAPOLATION_FACTOR} x calibrated range): extrapolated",
            f.per_nm2()
        )
    })
}

/// All forward quantities for one film at one fluence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub d0_nm: f64,
    pub fluence_per_nm2: f64,
    pub defect_fraction: f64,
    pub effective_thickness_nm: f64,
    pub r_sheet_ohm: f64,
    pub tc_k: f64,
    pub warnings: Vec<String>,
}

pub fn predict(f: Fluence, film: &FilmSpec, p: &ModelParams) -> Result<Prediction> {
    let r_sheet = sheet_resistance(f, film, p)?;
    Ok(Prediction {
        d0_nm: film.d0,
        fluence_per_nm2: f.per_nm2(),
        defect_fraction: defect_fraction(f, p),
        effective_thickness_nm: effective_thickness(f, film, p)?,
        r_sheet_ohm: r_sheet,
        tc_k: tc_from_scaling(r_sheet, film, p)?,
        warnings: extrapolation_warning(f).into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fl(v: f64) -> Fluence {
        Fluence::new(v).unwrap()
    }

    fn film(d0: f64) -> FilmSpec {
        FilmSpec::new(d0).unwrap()
    }

    #[test]
    fn defect_fraction_examples() {
        let p = ModelParams::published();
        assert_eq!(defect_fraction(Fluence::ZERO, &p), 0.79);
        assert!((defect_fraction(fl(1e9), &p) - 1.0).abs() < 1e-15);
        assert!((defect_fraction(fl(1000.0), &p) - 0.99809).abs() < 5e-6);
    }

    #[test]
    fn effective_thickness_examples() {
        let p = ModelParams::published();
        assert_relative_eq!(effective_thickness(fl(1000.0), &film(12.0), &p).unwrap(), 11.06, epsilon = 1e-12);
        assert_eq!(effective_thickness(Fluence::ZERO, &film(8.0), &p).unwrap(), 8.0);
        assert!(matches!(
            effective_thickness(fl(8511.0), &film(8.0), &p),
            Err(Error::ThicknessExhausted { .. })
        ));
    }

    #[test]
    fn sheet_resistance_examples() {
        let p = ModelParams::published();
        let r0 = sheet_resistance(Fluence::ZERO, &film(8.0), &p).unwrap();
        assert!((r0 - 292.0).abs() < 0.05, "{r0}");
        let r = sheet_resistance(fl(1000.0), &film(10.0), &p).unwrap();
        assert!((r - 288.4).abs() < 0.05, "{r}");
    }

    #[test]
    fn saturated_film_ignores_eta() {
        let mut p = ModelParams::published();
        p.nd0_vd = 1.0;
        let a = sheet_resistance(Fluence::ZERO, &film(10.0), &p).unwrap();
        p.eta_vd23 = 0.3;
        let b = sheet_resistance(Fluence::ZERO, &film(10.0), &p).unwrap();
        assert_eq!(a, 2618.0 / 10.0);
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_thickness_without_interpolation() {
        let p = ModelParams::published();
        assert!(matches!(
            sheet_resistance(Fluence::ZERO, &film(9.0), &p),
            Err(Error::UnknownThickness { .. })
        ));
    }

    #[test]
    fn interpolation_is_log_linear_and_bounded() {
        let mut p = ModelParams::published();
        p.interpolate_thickness = true;
        let a9 = p.a_over_vd_for(9.0).unwrap();
        assert_relative_eq!(a9, (2957.0f64 * 2618.0).sqrt(), max_relative = 1e-12);
        assert_eq!(p.a_over_vd_for(10.0).unwrap(), 2618.0);
        assert!(p.a_over_vd_for(14.0).is_err());
        assert!(p.a_over_vd_for(6.0).is_err());
    }

    #[test]
    fn scaling_law_examples() {
        let p = ModelParams::published();
        let tc = tc_from_scaling(206.8, &film(10.0), &p).unwrap();
        // 8.7575 from direct evaluation; quoted to 3 significant digits as 8.75.
        assert!((tc - 8.75).abs() < 0.01, "{tc}");
        let mut flat = p.clone();
        flat.scaling_b = 0.0;
        assert_eq!(tc_from_scaling(123.0, &film(10.0), &flat).unwrap(), 1.44e4 / 10.0);
        let mut lin = p.clone();
        lin.scaling_b = 1.0;
        let t1 = tc_from_scaling(100.0, &film(10.0), &lin).unwrap();
        let t2 = tc_from_scaling(200.0, &film(10.0), &lin).unwrap();
        assert_relative_eq!(t2, t1 / 2.0, max_relative = 1e-15);
        assert!(matches!(
            tc_from_scaling(0.0, &film(10.0), &p),
            Err(Error::NonPositiveResistance(_))
        ));
    }

    #[test]
    fn tc_vs_fluence_examples() {
        let p = ModelParams::published();
        let tc10 = tc_vs_fluence(Fluence::ZERO, &film(10.0), &p).unwrap();
        assert!((tc10 - 8.75).abs() < 0.01, "{tc10}");
        let tc8 = tc_vs_fluence(Fluence::ZERO, &film(8.0), &p).unwrap();
        assert!(tc8 < tc10);

        let mut frozen = p.clone();
        frozen.eta_vd23 = 0.0;
        frozen.r_s = 0.0;
        let t0 = tc_vs_fluence(Fluence::ZERO, &film(10.0), &frozen).unwrap();
        let t1 = tc_vs_fluence(fl(2500.0), &film(10.0), &frozen).unwrap();
        assert_eq!(t0, t1);
    }

    #[test]
    fn sheet_resistance_at_zero_is_exact() {
        let p = ModelParams::published();
        for d in [8.0, 10.0, 12.0] {
            let expected = p.nd0_vd * p.a_over_vd[&(d as u32)] / d;
            assert_eq!(sheet_resistance(Fluence::ZERO, &film(d), &p).unwrap(), expected);
        }
    }

    #[test]
    fn closed_form_satisfies_ode_by_finite_differences() {
        // Five-point central stencil; the range keeps df/dF well above the
        // rounding floor of f near 1.
        let p = ModelParams::published();
        let h = 1.0;
        let f = |x: f64| defect_fraction(fl(x), &p);
        for i in 0..=16 {
            let x = 2.0 + 50.0 * i as f64;
            let fd = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
            let rhs = p.eta_vd23 * (1.0 - f(x));
            assert!(((fd - rhs) / rhs).abs() < 1e-10, "F={x}: fd={fd} rhs={rhs}");
        }
    }

    #[test]
    fn extrapolation_flag_threshold() {
        assert!(extrapolation_warning(fl(3250.0)).is_none());
        assert!(extrapolation_warning(fl(3250.1)).is_some());
        let pr = predict(fl(4000.0), &film(12.0), &ModelParams::published()).unwrap();
        assert_eq!(pr.warnings.len(), 1);
    }

    #[test]
    fn toml_round_trip_and_field_names() {
        let p = ModelParams::published();
        let s = p.to_toml_string();
        for key in ["[resistance]", "[scaling]", "a_over_vD", "nD0_vD", "eta_vD23", "r_s", "A =", "B ="] {
            assert!(s.contains(key), "missing {key} in\n{s}");
        }
        assert_eq!(ModelParams::from_toml_str(&s).unwrap(), p);
    }

    #[test]
    fn bundled_table_matches_published() {
        let p = ModelParams::from_toml_str(crate::data::PUBLISHED_PARAMS_TOML).unwrap();
        assert_eq!(p, ModelParams::published());
    }

    #[test]
    fn toml_rejects_bad_values() {
        let s = ModelParams::published().to_toml_string().replace("nD0_vD = 0.79", "nD0_vD = 1.5");
        assert!(ModelParams::from_toml_str(&s).is_err());
        let s = ModelParams::published().to_toml_string().replace("[scaling]", "[scaling]\nC = 1.0");
        assert!(ModelParams::from_toml_str(&s).is_err());
    }

    #[test]
    fn film_and_fluence_invariants() {
        assert!(Fluence::new(-1.0).is_err());
        assert!(Fluence::new(f64::NAN).is_err());
        assert!(FilmSpec::new(1.0).is_err());
        assert!(FilmSpec::with_oxide(5.0, 0.0).is_ok());
        assert_relative_eq!(Fluence::from_per_cm2(1e17).unwrap().per_nm2(), 1000.0);
    }

    proptest! {
        #[test]
        fn resistance_increases_and_tc_decreases(
            d0 in prop::sample::select(vec![8.0, 10.0, 12.0]),
            f1 in 0.0f64..8000.0,
            df in 1e-3f64..500.0,
        ) {
            let p = ModelParams::published();
            let film = film(d0);
            let f2 = f1 + df;
            prop_assume!(f2 < thickness_limit(&film, &p));
            let r1 = sheet_resistance(fl(f1), &film, &p).unwrap();
            let r2 = sheet_resistance(fl(f2), &film, &p).unwrap();
            prop_assert!(r2 > r1);
            let t1 = tc_vs_fluence(fl(f1), &film, &p).unwrap();
            let t2 = tc_vs_fluence(fl(f2), &film, &p).unwrap();
            prop_assert!(t2 < t1);
            prop_assert!(defect_fraction(fl(f2), &p) >= defect_fraction(fl(f1), &p));
        }

        #[test]
        fn scaling_inverse_round_trips(tc in 0.1f64..20.0, d0 in 3.0f64..50.0, b in 0.2f64..2.0) {
            let mut p = ModelParams::published();
            p.scaling_b = b;
            let film = FilmSpec::new(d0).unwrap();
            let r = r_sheet_for_tc(tc, &film, &p).unwrap();
            let back = tc_from_scaling(r, &film, &p).unwrap();
            prop_assert!(((back - tc) / tc).abs() < 1e-12);
        }

        #[test]
        fn forward_model_is_pure(f in 0.0f64..3000.0) {
            let p = ModelParams::published();
            let a = predict(fl(f), &film(10.0), &p).unwrap();
            let b = predict(fl(f), &film(10.0), &p).unwrap();
            prop_assert_eq!(a.r_sheet_ohm.to_bits(), b.r_sheet_ohm.to_bits());
            prop_assert_eq!(a.tc_k.to_bits(), b.tc_k.to_bits());
        }
    }
}
