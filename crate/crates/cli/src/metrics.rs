use std::path::Path;

use hedose_core::constants::K_B;
use hedose_core::detector::{
    classify_saturation, decay_time, kinetic_inductance, sde_curve,
    switching_current_density, DetectorRecord, MaterialParams, SaturationOptions,
};
use hedose_core::io::{load_detectors, plot_csv, PlotPoint, PointKind};
use hedose_core::model::{sheet_resistance, tc_vs_fluence};
use hedose_core::{FilmSpec, Fluence};
use serde_json::json;

use crate::args::{MaterialArgs, MetricsCommand};
use crate::context::{CliResult, Context, Ctx, Outcome};

pub fn detectors(ctx: &mut Ctx, path: &Path) -> CliResult<Vec<DetectorRecord>> {
    let (dets, files) = load_detectors(path)?;
    for f in &files {
        ctx.input(f);
    }
    Ok(dets)
}

pub fn run(ctx: &mut Ctx, cmd: &MetricsCommand) -> CliResult<Outcome> {
    match cmd {
        MetricsCommand::Sde(a) => {
            let dets = detectors(ctx, &a.detectors)?;
            sde(&dets)
        }
        MetricsCommand::Jsw(a) => {
            let dets = detectors(ctx, &a.detectors)?;
            jsw(ctx, &dets)
        }
        MetricsCommand::Lk { detectors: a, material } => {
            let dets = detectors(ctx, &a.detectors)?;
            inductance(ctx, &dets, material, false)
        }
        MetricsCommand::Tau { detectors: a, material } => {
            let dets = detectors(ctx, &a.detectors)?;
            inductance(ctx, &dets, material, true)
        }
        MetricsCommand::Saturation { detectors: a, window, threshold } => {
            let dets = detectors(ctx, &a.detectors)?;
            saturation(&dets, &SaturationOptions { window: *window, threshold: *threshold })
        }
    }
}

fn sde(dets: &[DetectorRecord]) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for d in dets {
        let (curve, warnings) = sde_curve(d).context(|| format!("detector {}", d.id))?;
        out.warnings.extend(warnings);
        let max = curve.iter().map(|c| c.1).reduce(f64::max);
        match max {
            Some(m) => out.summary.push(format!("{}: max SDE {:.1}% over {} bias points", d.id, m * 100.0, curve.len())),
            None => out.warnings.push(format!("detector {}: no count data", d.id)),
        }
        points.extend(curve.iter().map(|&(b, s)| PlotPoint { series: d.id.clone(), kind: PointKind::Data, x: b, y: s, y_err: None }));
        rows.push(json!({
            "id": d.id,
            "sde_max": max,
            "curve": curve.iter().map(|&(b, s)| json!({ "bias_uA": b, "sde": s })).collect::<Vec<_>>(),
        }));
    }
    Ok(Outcome { result: json!({ "detectors": rows }), ..out }.file("sde_vs_bias.csv", plot_csv(&points)))
}

fn jsw(ctx: &Ctx, dets: &[DetectorRecord]) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for d in dets {
        let film = FilmSpec::new(d.d0)?;
        let j = switching_current_density(d, &ctx.params, &film).context(|| format!("detector {}", d.id))?;
        out.summary.push(format!("{}: j_sw={j:.4e} A/m^2", d.id));
        rows.push(json!({ "id": d.id, "jsw_A_per_m2": j, "oxide_nm": film.oxide }));
    }
    Ok(Outcome { result: json!({ "detectors": rows }), ..out })
}

/// Kinetic inductance, and the decay time when `with_tau`, from the model
/// sheet resistance and Tc at each detector's fluence.
fn inductance(ctx: &Ctx, dets: &[DetectorRecord], m: &MaterialArgs, with_tau: bool) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for d in dets {
        let row = (|| {
            let film = FilmSpec::new(d.d0)?;
            let f = Fluence::new(d.fluence)?;
            let r = sheet_resistance(f, &film, &ctx.params)?;
            let tc = tc_vs_fluence(f, &film, &ctx.params)?;
            let mat = MaterialParams { tc, gap0: m.gap_ratio * K_B * tc, r_load: m.r_load };
            let lk = kinetic_inductance(d, r, &mat)?;
            let tau = if with_tau { Some(decay_time(lk, &mat)?) } else { None };
            Ok::<_, hedose_core::Error>((r, tc, d.squares(), lk, tau))
        })()
        .context(|| format!("detector {}", d.id))?;
        let (r, tc, squares, lk, tau) = row;
        let mut line = format!("{}: R_sheet={r:.2} Ω Tc={tc:.3} K squares={squares:.1} L_k={:.4} nH", d.id, lk * 1e9);
        if let Some(t) = tau {
            line.push_str(&format!(" tau={:.4} ns", t * 1e9));
        }
        out.summary.push(line);
        rows.push(json!({
            "id": d.id,
            "r_sheet_ohm": r,
            "tc_K": tc,
            "squares": squares,
            "lk_H": lk,
            "tau_s": tau,
            "r_load_ohm": m.r_load,
        }));
    }
    Ok(Outcome { result: json!({ "detectors": rows }), ..out })
}

fn saturation(dets: &[DetectorRecord], opts: &SaturationOptions) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for d in dets {
        let (curve, warnings) = sde_curve(d).context(|| format!("detector {}", d.id))?;
        out.warnings.extend(warnings);
        if curve.len() < 5 {
            out.warnings.push(format!("detector {}: {} bias points, saturation needs 5", d.id, curve.len()));
            continue;
        }
        let s = classify_saturation(&curve, opts).context(|| format!("detector {}", d.id))?;
        let top = curve[curve.len() - 1].1;
        let class = serde_json::to_value(s.class).expect("class serialises");
        out.summary.push(format!(
            "{}: {} (relative rise {:.4}, SDE at top bias {:.1}%)",
            d.id,
            class.as_str().unwrap_or_default(),
            s.relative_rise,
            top * 100.0
        ));
        rows.push(json!({ "id": d.id, "class": class, "relative_rise": s.relative_rise }));
    }
    Ok(Outcome { result: json!({ "window": opts.window, "threshold": opts.threshold, "detectors": rows }), ..out })
}
