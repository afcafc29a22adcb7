use hedose_core::io::{parse_anchors, plan_csv, read_text};
use hedose_core::planner::{metric_at, plan_dose, trim_plan, Device, DoseTarget, MetricKind, PlanOptions, PlanRow, TrimDevice};
use hedose_core::{Error, FilmSpec};
use serde_json::json;

use crate::args::PlanArgs;
use crate::context::{CliResult, Context, Ctx, Outcome};
use crate::metrics::detectors;

pub fn run(ctx: &mut Ctx, args: &PlanArgs) -> CliResult<Outcome> {
    let kind: MetricKind = args.kind.parse()?;
    let mut opts = PlanOptions { r_load: args.r_load, ..PlanOptions::default() };
    if let Some(f) = args.f_max {
        opts.f_max = ctx.fluence("f-max", f)?;
    }

    let Some(path) = &args.detectors else {
        if kind.needs_detector() {
            return Err(Error::invalid("--detectors", format!("{} needs detector geometry", kind.name())).into());
        }
        let d0 = args.d0.ok_or_else(|| Error::invalid("--d0", "a film plan needs --d0 or --detectors"))?;
        let target = DoseTarget { kind, value: args.value, device: Device::Film(FilmSpec::new(d0)?) };
        let plan = plan_dose(&target, &ctx.params, &opts)?;
        return Ok(Outcome::new(json!({ "kind": kind, "target": args.value, "d0_nm": d0, "plan": plan }))
            .line(format!(
                "{} = {} reached at F={:.6} ions/nm^2 ({:.6e} ions/cm^2)",
                kind.name(),
                plan.achieved,
                plan.fluence,
                plan.fluence * hedose_core::constants::IONS_PER_CM2_PER_NM2
            ))
            .warn(plan.warnings.clone()));
    };

    let dets = detectors(ctx, path)?;
    let (rows, warnings) = match &args.anchors {
        Some(anchor_path) => {
            ctx.input(anchor_path);
            let anchors = parse_anchors(&read_text(anchor_path)?, &anchor_path.display().to_string())?;
            let devices = dets
                .into_iter()
                .map(|d| {
                    let anchor = *anchors
                        .get(&d.id)
                        .ok_or_else(|| Error::invalid("anchor_value", format!("no anchor for detector {}", d.id)))
                        .context(|| anchor_path.display().to_string())?;
                    Ok(TrimDevice { id: d.id.clone(), device: Device::Detector(d), anchor })
                })
                .collect::<CliResult<Vec<_>>>()?;
            let plan = trim_plan(&devices, kind, args.value, &ctx.params, &opts);
            (plan.rows, plan.warnings)
        }
        None => {
            let rows: Vec<PlanRow> = dets
                .into_iter()
                .map(|d| {
                    let id = d.id.clone();
                    let target = DoseTarget { kind, value: args.value, device: Device::Detector(d) };
                    match plan_dose(&target, &ctx.params, &opts) {
                        Ok(p) => PlanRow {
                            id,
                            fluence_per_nm2: p.fluence,
                            predicted_metric: p.achieved,
                            extrapolated: p.extrapolated,
                            warning: p.warnings.join("; "),
                        },
                        Err(e) => PlanRow {
                            id,
                            fluence_per_nm2: 0.0,
                            predicted_metric: metric_at(kind, &target.device, 0.0, &ctx.params, &opts).unwrap_or(f64::NAN),
                            extrapolated: false,
                            warning: format!("{}: {e}", e.kind()),
                        },
                    }
                })
                .collect();
            let warnings =
                rows.iter().filter(|r| !r.warning.is_empty()).map(|r| format!("device {}: {}", r.id, r.warning)).collect();
            (rows, warnings)
        }
    };

    let mut out = Outcome::new(json!({ "kind": kind, "target": args.value, "rows": rows })).warn(warnings);
    for r in &rows {
        out.summary.push(format!("{}: F={:.6} ions/nm^2 -> {}", r.id, r.fluence_per_nm2, r.predicted_metric));
    }
    Ok(out.file("plan.csv", plan_csv(&rows)))
}
