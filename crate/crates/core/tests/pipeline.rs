//! Whole-library flows: files in, fits and plans out.

use hedose_core::detector::{evaluate_detectors, AbsorptionTable, CountRow, DetectorRecord, SaturationOptions};
use hedose_core::estimation::{fit_rsheet_model, fit_scaling_law, initial_guess, synthesize, FitOptions, STUDY_FLUENCES, STUDY_THICKNESSES};
use hedose_core::io::{detectors_csv, film_points_csv, load_detectors, parse_film_points};
use hedose_core::model::{sheet_resistance, tc_vs_fluence};
use hedose_core::planner::{metric_at, plan_dose, trim_plan, Device, DoseTarget, MetricKind, PlanOptions, TrimDevice};
use hedose_core::{FilmSpec, Fluence, ModelParams};

#[test]
fn csv_to_fit_to_plan() {
    let truth = ModelParams::published();
    let text = film_points_csv(&synthesize(&truth, &STUDY_THICKNESSES, &STUDY_FLUENCES).unwrap());
    let data = parse_film_points(&text, "film_points.csv").unwrap();

    let mut fit = fit_rsheet_model(&data, &initial_guess(&data), &FitOptions::default()).unwrap().params;
    let scaling = fit_scaling_law(&data).unwrap();
    fit.scaling_a = scaling.a;
    fit.scaling_b = scaling.b;

    let film = FilmSpec::new(12.0).unwrap();
    let target = tc_vs_fluence(Fluence::new(640.0).unwrap(), &film, &truth).unwrap();
    let plan = plan_dose(&DoseTarget { kind: MetricKind::TargetTc, value: target, device: Device::Film(film) }, &fit, &PlanOptions::default()).unwrap();
    assert!((plan.fluence - 640.0).abs() < 1e-4, "{}", plan.fluence);
}

fn detector(id: &str, d0: f64, fluence: f64) -> DetectorRecord {
    DetectorRecord {
        id: id.into(),
        d0,
        fluence,
        width: 100.0,
        fill_factor: 0.5,
        area_side: 10.0,
        wire_length: None,
        i_sw: 20.0,
        counts: (0..8).map(|i| CountRow { bias: 10.0 + i as f64, cr: 4e5 + 1e3 * i as f64, dcr: 10.0 }).collect(),
        photon_rate: 1e6,
    }
}

#[test]
fn detector_directory_to_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let dets = vec![detector("a", 10.0, 0.0), detector("b", 12.0, 400.0)];
    std::fs::write(dir.path().join("detectors.csv"), detectors_csv(&dets)).unwrap();
    std::fs::write(dir.path().join("counts_b.csv"), hedose_core::io::counts_csv(&dets[1].counts)).unwrap();
    let (loaded, files) = load_detectors(dir.path()).unwrap();
    assert_eq!(files.len(), 2);
    assert!(loaded[0].counts.is_empty());
    assert_eq!(loaded[1].counts, dets[1].counts);

    let p = ModelParams::published();
    let m = evaluate_detectors(&loaded, &p, &AbsorptionTable::bundled(), &SaturationOptions::default()).unwrap();
    assert_eq!(m.iter().map(|x| x.id.as_str()).collect::<Vec<_>>(), ["a", "b"]);
    assert!(m[0].sde_max.is_none());
    let r = sheet_resistance(Fluence::new(400.0).unwrap(), &FilmSpec::new(12.0).unwrap(), &p).unwrap();
    assert_eq!(m[1].r_sheet_ohm, r);
    assert!(m[1].saturation.is_some());
}

#[test]
fn trim_plan_brings_anchored_devices_to_one_tau() {
    let p = ModelParams::published();
    let opts = PlanOptions::default();
    let base = detector("x", 10.0, 0.0);
    let tau0 = metric_at(MetricKind::TargetTau, &Device::Detector(base.clone()), 0.0, &p, &opts).unwrap();
    let devices: Vec<TrimDevice> = [0.97, 1.0, 1.04]
        .iter()
        .enumerate()
        .map(|(i, s)| TrimDevice { id: format!("dev{i}"), device: Device::Detector(base.clone()), anchor: tau0 * s })
        .collect();
    let target = tau0 * 1.3;
    let plan = trim_plan(&devices, MetricKind::TargetTau, target, &p, &opts);
    assert!(plan.warnings.is_empty(), "{:?}", plan.warnings);
    for r in &plan.rows {
        assert!((r.predicted_metric / target - 1.0).abs() < 1e-9, "{r:?}");
    }
    // Devices that start higher need less dose.
    assert!(plan.rows[0].fluence_per_nm2 > plan.rows[1].fluence_per_nm2);
    assert!(plan.rows[1].fluence_per_nm2 > plan.rows[2].fluence_per_nm2);
}
