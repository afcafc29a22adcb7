//! Tidy plot-data tables and the declarative plot spec.

use std::collections::BTreeMap;

use hedose_core::detector::{
    classify_saturation, decay_time, kinetic_inductance, sde_curve, AbsorptionTable, DetectorRecord, FilmTc,
    MaterialParams, SaturationClass, SaturationOptions, TcSdeReport,
};
use hedose_core::estimation::FilmPoint;
use hedose_core::io::{plot_csv, series_of, Axis, FigureSpec, PlotPoint, PlotSpec, PointKind, Scale};
use hedose_core::model::{sheet_resistance, tc_vs_fluence, thickness_limit};
use hedose_core::{FilmSpec, Fluence, ModelParams};

pub const RSHEET_FILE: &str = "rsheet_vs_fluence.csv";
pub const TC_FILE: &str = "tc_vs_fluence.csv";
pub const SDE_ISW_FILE: &str = "sde_vs_isw.csv";
pub const TAU_FILE: &str = "tau_vs_fluence.csv";
pub const SDE_TC_FILE: &str = "sde_vs_tc.csv";

const CURVE_POINTS: usize = 200;
const DEFAULT_SPAN: f64 = 2600.0;

fn label(d0: f64) -> String {
    format!("d0={d0}nm")
}

/// Distinct thicknesses in ascending order.
fn thicknesses(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut ds: Vec<f64> = values.collect();
    ds.sort_by(f64::total_cmp);
    ds.dedup();
    ds
}

/// Upper end of a model curve: the largest measured fluence, kept inside the film.
fn span(max_data: f64, film: &FilmSpec, p: &ModelParams) -> f64 {
    let top = if max_data > 0.0 { max_data } else { DEFAULT_SPAN };
    top.min(0.999 * thickness_limit(film, p))
}

fn linear_grid(hi: f64) -> impl Iterator<Item = f64> {
    (0..CURVE_POINTS).map(move |i| hi * i as f64 / (CURVE_POINTS - 1) as f64)
}

/// From 1 ion/nm^2 to `hi`, evenly spaced in log F.
fn log_grid(hi: f64) -> impl Iterator<Item = f64> {
    let top = hi.max(1.0).ln();
    (0..CURVE_POINTS).map(move |i| (top * i as f64 / (CURVE_POINTS - 1) as f64).exp())
}

fn model_curve(
    series: &str,
    grid: impl Iterator<Item = f64>,
    eval: impl Fn(f64) -> hedose_core::Result<f64>,
) -> Vec<PlotPoint> {
    grid.filter_map(|f| eval(f).ok().map(|y| PlotPoint { series: series.to_string(), kind: PointKind::Fit, x: f, y, y_err: None }))
        .collect()
}

fn film_figure(
    data: &[FilmPoint],
    p: &ModelParams,
    value: impl Fn(&FilmPoint) -> Option<(f64, Option<f64>)>,
    model: impl Fn(Fluence, &FilmSpec, &ModelParams) -> hedose_core::Result<f64>,
    log: bool,
) -> Vec<PlotPoint> {
    let mut points = Vec::new();
    for d0 in thicknesses(data.iter().filter(|q| value(q).is_some()).map(|q| q.d0)) {
        let series = label(d0);
        let mut rows: Vec<(f64, f64, Option<f64>)> =
            data.iter().filter(|q| q.d0 == d0).filter_map(|q| value(q).map(|(y, e)| (q.fluence, y, e))).collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let max_f = rows.iter().map(|r| r.0).fold(0.0, f64::max);
        points.extend(rows.into_iter().map(|(x, y, y_err)| PlotPoint { series: series.clone(), kind: PointKind::Data, x, y, y_err }));
        let Ok(film) = FilmSpec::new(d0) else { continue };
        let hi = span(max_f, &film, p);
        let eval = |f: f64| model(Fluence::new(f)?, &film, p);
        if log {
            points.extend(model_curve(&series, log_grid(hi), eval));
        } else {
            points.extend(model_curve(&series, linear_grid(hi), eval));
        }
    }
    points
}

/// Measured R_sheet per thickness with the model sampled at 200 fluences.
pub fn rsheet_vs_fluence(data: &[FilmPoint], p: &ModelParams) -> String {
    plot_csv(&rsheet_points(data, p))
}

fn rsheet_points(data: &[FilmPoint], p: &ModelParams) -> Vec<PlotPoint> {
    film_figure(data, p, |q| q.r_sheet.map(|r| (r, q.sigma_r)), sheet_resistance, false)
}

fn tc_points(data: &[FilmPoint], p: &ModelParams) -> Vec<PlotPoint> {
    film_figure(data, p, |q| q.tc.map(|t| (t, q.sigma_tc)), tc_vs_fluence, true)
}

/// Best SDE against switching current, one series per thickness, with the
/// absorption limit as a flat model line.
fn sde_isw_points(dets: &[DetectorRecord], absorption: &AbsorptionTable) -> Vec<PlotPoint> {
    let mut points = Vec::new();
    for d0 in thicknesses(dets.iter().map(|d| d.d0)) {
        let series = label(d0);
        let mut rows: Vec<(f64, f64)> = dets
            .iter()
            .filter(|d| d.d0 == d0)
            .filter_map(|d| {
                let (curve, _) = sde_curve(d).ok()?;
                curve.iter().map(|c| c.1).reduce(f64::max).map(|s| (d.i_sw, s))
            })
            .collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        if let (Some(lo), Some(hi), Some(abs)) = (rows.first(), rows.last(), absorption.for_thickness(d0)) {
            let y = abs.alpha_percent / 100.0;
            let limit = format!("{series} absorption");
            for x in [lo.0, hi.0] {
                points.push(PlotPoint { series: limit.clone(), kind: PointKind::Fit, x, y, y_err: None });
            }
        }
        points.extend(rows.into_iter().map(|(x, y)| PlotPoint { series: series.clone(), kind: PointKind::Data, x, y, y_err: None }));
    }
    points
}

/// Model decay time at each detector, and along fluence for the first
/// detector geometry of each thickness.
fn tau_points(dets: &[DetectorRecord], p: &ModelParams) -> Vec<PlotPoint> {
    let tau = |d: &DetectorRecord, f: f64| -> hedose_core::Result<f64> {
        let film = FilmSpec::new(d.d0)?;
        let fl = Fluence::new(f)?;
        let mat = MaterialParams::bcs(tc_vs_fluence(fl, &film, p)?)?;
        decay_time(kinetic_inductance(d, sheet_resistance(fl, &film, p)?, &mat)?, &mat)
    };
    let mut points = Vec::new();
    for d0 in thicknesses(dets.iter().map(|d| d.d0)) {
        let series = label(d0);
        let group: Vec<&DetectorRecord> = dets.iter().filter(|d| d.d0 == d0).collect();
        let mut rows: Vec<(f64, f64)> = group.iter().filter_map(|d| tau(d, d.fluence).ok().map(|t| (d.fluence, t))).collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let max_f = rows.iter().map(|r| r.0).fold(0.0, f64::max);
        points.extend(rows.into_iter().map(|(x, y)| PlotPoint { series: series.clone(), kind: PointKind::Data, x, y, y_err: None }));
        let Ok(film) = FilmSpec::new(d0) else { continue };
        let geometry = group[0];
        points.extend(model_curve(&series, linear_grid(span(max_f, &film, p)), |f| tau(geometry, f)));
    }
    points
}

fn sde_tc_points(join: &TcSdeReport) -> Vec<PlotPoint> {
    let mut rows = join.rows.clone();
    rows.sort_by(|a, b| a.d0.total_cmp(&b.d0).then(a.tc.total_cmp(&b.tc)).then(a.sde.total_cmp(&b.sde)));
    rows.iter().map(|r| PlotPoint { series: label(r.d0), kind: PointKind::Data, x: r.tc, y: r.sde, y_err: None }).collect()
}

pub fn film_tcs(data: &[FilmPoint]) -> Vec<FilmTc> {
    data.iter().filter_map(|q| q.tc.map(|tc| FilmTc { d0: q.d0, fluence: q.fluence, tc })).collect()
}

/// Ids of detectors whose SDE saturates with bias.
pub fn saturating(dets: &[DetectorRecord]) -> Vec<String> {
    dets.iter()
        .filter(|d| {
            sde_curve(d).ok().is_some_and(|(c, _)| {
                c.len() >= 5
                    && classify_saturation(&c, &SaturationOptions::default())
                        .is_ok_and(|s| s.class == SaturationClass::Saturating)
            })
        })
        .map(|d| d.id.clone())
        .collect()
}

fn axis(label: &str, unit: &str, scale: Scale) -> Axis {
    Axis { label: label.into(), unit: unit.into(), scale }
}

fn fluence_axis(scale: Scale) -> Axis {
    axis("He ion fluence", "ions/nm^2", scale)
}

/// All five plot-data files, by name, plus `plot_spec.json`.
pub fn figures(
    data: &[FilmPoint],
    dets: &[DetectorRecord],
    join: &TcSdeReport,
    p: &ModelParams,
    absorption: &AbsorptionTable,
) -> Vec<(String, String)> {
    let sets: [(&str, &str, Axis, Axis, Vec<PlotPoint>); 5] = [
        (RSHEET_FILE, "Sheet resistance vs fluence", fluence_axis(Scale::Linear), axis("R_sheet", "ohm", Scale::Linear), rsheet_points(data, p)),
        (TC_FILE, "Critical temperature vs fluence", fluence_axis(Scale::Log), axis("Tc", "K", Scale::Linear), tc_points(data, p)),
        (SDE_ISW_FILE, "Maximum SDE vs switching current", axis("I_sw", "uA", Scale::Linear), axis("SDE", "1", Scale::Linear), sde_isw_points(dets, absorption)),
        (TAU_FILE, "Decay time vs fluence", fluence_axis(Scale::Linear), axis("tau", "s", Scale::Linear), tau_points(dets, p)),
        (SDE_TC_FILE, "Maximum SDE vs film Tc", axis("Tc", "K", Scale::Linear), axis("SDE", "1", Scale::Linear), sde_tc_points(join)),
    ];
    let mut spec = PlotSpec { schema_version: 1, figures: Vec::new() };
    let mut files = Vec::new();
    for (file, title, x, y, points) in sets {
        spec.figures.push(FigureSpec { file: file.into(), title: title.into(), x, y, series: series_of(&points) });
        files.push((file.to_string(), plot_csv(&points)));
    }
    let mut json = serde_json::to_string_pretty(&spec).expect("plot spec serialises");
    json.push('\n');
    files.push(("plot_spec.json".to_string(), json));
    files
}

/// Per-thickness count of detectors, for the summary.
pub fn detector_counts(dets: &[DetectorRecord]) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for d in dets {
        *m.entry(label(d.d0)).or_insert(0) += 1;
    }
    m
}
