//! Synthetic input files and a runner for the built binary.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hedose_core::detector::{CountRow, DetectorRecord};
use hedose_core::estimation::{synthesize, STUDY_FLUENCES, STUDY_THICKNESSES};
use hedose_core::io::{counts_csv, detectors_csv, film_points_csv, hall_sweep_csv, rt_sweep_csv};
use hedose_core::transport::{HallRecord, HallSweep, TransportRecord, TransportSweep};
use hedose_core::ModelParams;

pub const BIN: &str = env!("CARGO_BIN_EXE_hedose");

pub fn hedose(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env("SOURCE_DATE_EPOCH", "0").output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

fn write(path: &Path, text: &str) {
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(path, text).unwrap();
}

/// Noiseless model data at 3 thicknesses x 8 fluences.
pub fn film_points(dir: &Path) -> PathBuf {
    let path = dir.join("film_points.csv");
    let pts = synthesize(&ModelParams::published(), &STUDY_THICKNESSES, &STUDY_FLUENCES).unwrap();
    write(&path, &film_points_csv(&pts));
    path
}

/// Logistic R(T) transition centred on `tc` with width `w`.
pub fn logistic_sweep(tc: f64, w: f64, field: f64) -> TransportSweep {
    let records = (0..=300)
        .map(|i| {
            let t = 2.0 + 0.05 * i as f64;
            TransportRecord { temperature: t, field, resistance: 300.0 / (1.0 + (-(t - tc) / w).exp()) }
        })
        .collect();
    TransportSweep::new(records).unwrap()
}

/// Sweeps at 0, 0.25, 0.5, 0.75 and 1 T with Tc dropping 0.5 K per T.
pub fn rt_sweeps(dir: &Path) -> PathBuf {
    let sweeps = dir.join("sweeps");
    for (i, b) in [0.0, 0.25, 0.5, 0.75, 1.0].into_iter().enumerate() {
        write(&sweeps.join(format!("rt_{i}.csv")), &rt_sweep_csv(&logistic_sweep(8.0 - 0.5 * b, 0.1, b)));
    }
    sweeps
}

/// Hall sweep of an electron gas with density `n_e` in a `d0` nm film.
pub fn hall_sweep(dir: &Path, n_e: f64, d0: f64) -> PathBuf {
    let r_h = -1.0 / (n_e * hedose_core::constants::E_CHARGE);
    let slope = r_h / (d0 * 1e-9);
    let current = 1e-4;
    let records = (-10..=10)
        .map(|i| {
            let b = 0.1 * i as f64;
            HallRecord { field: b, hall_voltage: slope * b * current, current }
        })
        .collect();
    let path = dir.join("hall.csv");
    write(&path, &hall_sweep_csv(&HallSweep { records, d0 }));
    path
}

fn counts(sde_top: f64, photon_rate: f64, saturating: bool) -> Vec<CountRow> {
    (0..=20)
        .map(|i| {
            let bias = 5.0 + 0.75 * i as f64;
            let centre = if saturating { 10.0 } else { 22.0 };
            let s = sde_top / (1.0 + (-(bias - centre) / 1.0).exp());
            CountRow { bias, cr: s * photon_rate + 100.0, dcr: 100.0 }
        })
        .collect()
}

pub fn detector_records() -> Vec<DetectorRecord> {
    let base = |id: &str, d0: f64, fluence: f64, i_sw: f64, sde: f64, sat: bool| DetectorRecord {
        id: id.into(),
        d0,
        fluence,
        width: 100.0,
        fill_factor: 0.5,
        area_side: 10.0,
        wire_length: None,
        i_sw,
        counts: counts(sde, 1e6, sat),
        photon_rate: 1e6,
    };
    vec![
        base("d10a", 10.0, 0.0, 24.0, 0.30, false),
        base("d10b", 10.0, 50.0, 21.0, 0.45, true),
        base("d10c", 10.0, 800.0, 15.0, 0.50, true),
        base("d8a", 8.0, 200.0, 12.0, 0.40, true),
    ]
}

/// `detectors.csv` plus one `counts_<id>.csv` per detector.
pub fn detectors(dir: &Path) -> PathBuf {
    let dets = detector_records();
    let root = dir.join("detectors");
    write(&root.join("detectors.csv"), &detectors_csv(&dets));
    for d in &dets {
        write(&root.join(format!("counts_{}.csv", d.id)), &counts_csv(&d.counts));
    }
    root
}

/// `anchors.csv` from `(id, value)` pairs.
pub fn anchors(dir: &Path, values: &[(&str, f64)]) -> PathBuf {
    let path = dir.join("anchors.csv");
    let map = values.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    write(&path, &hedose_core::io::anchors_csv(&map));
    path
}
