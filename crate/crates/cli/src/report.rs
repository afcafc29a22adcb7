use hedose_core::detector::{evaluate_detectors, tc_sde_join, AbsorptionTable, SaturationOptions};
use hedose_core::estimation::{fit_rsheet_model, fit_scaling_law, initial_guess, FitOptions};
use serde_json::json;

use crate::args::ReportArgs;
use crate::context::{CliResult, Ctx, Outcome};
use crate::fit::load_points;
use crate::metrics::detectors;
use crate::plots;

pub fn run(ctx: &mut Ctx, args: &ReportArgs) -> CliResult<Outcome> {
    let data = load_points(ctx, &args.data)?;
    let dets = match &args.detectors {
        Some(path) => detectors(ctx, path)?,
        None => Vec::new(),
    };
    let mut out = Outcome::default();

    let mut params = ctx.params.clone();
    let mut fit = None;
    let mut scaling = None;
    if !args.no_fit {
        let mut init = initial_guess(&data);
        init.scaling_a = params.scaling_a;
        init.scaling_b = params.scaling_b;
        let report = fit_rsheet_model(&data, &init, &FitOptions::default())?;
        out.warnings.extend(report.warnings.iter().cloned());
        params = report.params.clone();
        out.summary.push(format!(
            "R_sheet fit: converged={} nD0_vD={:.4} eta_vD23={:.4e} r_s={:.4e}",
            report.converged, params.nd0_vd, params.eta_vd23, params.r_s
        ));
        fit = Some(report);
        match fit_scaling_law(&data) {
            Ok(s) => {
                out.summary.push(format!("scaling fit: A={:.5e} B={:.5}", s.a, s.b));
                params.scaling_a = s.a;
                params.scaling_b = s.b;
                out.warnings.extend(s.warnings.iter().cloned());
                scaling = Some(s);
            }
            Err(e) => out.warnings.push(format!("scaling law not refitted, keeping A and B: {e}")),
        }
    }

    let absorption = AbsorptionTable::bundled();
    let metrics = evaluate_detectors(&dets, &params, &absorption, &SaturationOptions::default())?;
    for m in &metrics {
        out.warnings.extend(m.warnings.iter().cloned());
    }
    let join = tc_sde_join(&dets, &plots::film_tcs(&data), &absorption)?;
    out.warnings.extend(join.warnings.iter().cloned());
    out.summary.push(format!("{} film points, detectors {:?}", data.len(), plots::detector_counts(&dets)));

    let files = plots::figures(&data, &dets, &join, &params, &absorption);
    out.result = json!({
        "params": params,
        "rsheet_fit": fit,
        "scaling_fit": scaling,
        "detectors": metrics,
        "saturating": plots::saturating(&dets),
        "tc_sde": join.rows,
    });
    out.files.push(("fitted_params.toml".to_string(), params.to_toml_string()));
    out.files.extend(files);
    Ok(out)
}
