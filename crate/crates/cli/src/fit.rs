use std::collections::BTreeMap;
use std::path::Path;

use hedose_core::estimation::{
    compare_models, fit_empirical_tc, fit_exponential, fit_rsheet_model, fit_scaling_law, initial_guess, CandidateFit,
    FilmPoint, FitOptions, Weighting,
};
use hedose_core::io::{parse_film_points, read_text};
use hedose_core::model::{predict, tc_vs_fluence};
use hedose_core::{FilmSpec, Fluence};
use serde_json::json;

use crate::args::{DataArgs, FitEmpiricalArgs, FitRsheetArgs, PredictArgs, WeightingArg};
use crate::context::{CliResult, Context, Ctx, Outcome};
use crate::plots;

pub fn load_points(ctx: &mut Ctx, path: &Path) -> CliResult<Vec<FilmPoint>> {
    ctx.input(path);
    Ok(parse_film_points(&read_text(path)?, &path.display().to_string())?)
}

pub fn fit_rsheet(ctx: &mut Ctx, args: &FitRsheetArgs) -> CliResult<Outcome> {
    let data = load_points(ctx, &args.data)?;
    let mut opts = FitOptions {
        weighting: match args.weighting {
            WeightingArg::Auto => Weighting::Auto,
            WeightingArg::Unit => Weighting::Unit,
        },
        log_residuals: args.log_residuals,
        ..FitOptions::default()
    };
    opts.lm.max_iterations = args.max_iter;
    let mut init = if args.start_from_params { ctx.params.clone() } else { initial_guess(&data) };
    init.scaling_a = ctx.params.scaling_a;
    init.scaling_b = ctx.params.scaling_b;
    let report = fit_rsheet_model(&data, &init, &opts)?;

    let p = &report.params;
    let mut out = Outcome::new(&report)
        .line(format!("converged={} after {} iterations, chi2={:.6e}, dof={}", report.converged, report.n_iterations, report.chi2, report.dof))
        .line(format!("nD0_vD={:.6} eta_vD23={:.6e} nm^2 r_s={:.6e} nm/(ion/nm^2)", p.nd0_vd, p.eta_vd23, p.r_s));
    for (d, a) in &p.a_over_vd {
        let rms = report.residual_rms.get(d).copied().unwrap_or(f64::NAN);
        out = out.line(format!("a_over_vD[{d} nm]={a:.6} ohm  residual_rms={rms:.3e} ohm"));
    }
    let plot = plots::rsheet_vs_fluence(&data, p);
    Ok(out.warn(report.warnings.clone()).file("fitted_params.toml", p.to_toml_string()).file(plots::RSHEET_FILE, plot))
}

pub fn fit_scaling(ctx: &mut Ctx, args: &DataArgs) -> CliResult<Outcome> {
    let data = load_points(ctx, &args.data)?;
    let fit = fit_scaling_law(&data)?;
    let sa = fit.covariance.std_dev("A").unwrap_or(f64::NAN);
    let sb = fit.covariance.std_dev("B").unwrap_or(f64::NAN);
    let mut params = ctx.params.clone();
    params.scaling_a = fit.a;
    params.scaling_b = fit.b;
    Ok(Outcome::new(&fit)
        .line(format!("A={:.6e} ± {sa:.2e}  B={:.6} ± {sb:.2e}  (n={}, log rms={:.3e})", fit.a, fit.b, fit.n, fit.residual_rms))
        .warn(fit.warnings.clone())
        .file("fitted_params.toml", params.to_toml_string()))
}

pub fn fit_empirical(ctx: &mut Ctx, args: &FitEmpiricalArgs) -> CliResult<Outcome> {
    let data = load_points(ctx, &args.data)?;
    let thicknesses: Vec<f64> = match args.d0 {
        Some(d) => vec![d],
        None => {
            let mut ds: Vec<f64> = data.iter().filter(|p| p.tc.is_some()).map(|p| p.d0).collect();
            ds.sort_by(f64::total_cmp);
            ds.dedup();
            ds
        }
    };
    let mut fits = Vec::new();
    let mut comparisons = BTreeMap::new();
    let mut out = Outcome::default();
    for d0 in thicknesses {
        let fit = fit_empirical_tc(&data, d0).context(|| format!("d0={d0} nm"))?;
        let mut pts: Vec<(f64, f64)> =
            data.iter().filter(|p| p.d0 == d0).filter_map(|p| p.tc.map(|tc| (p.fluence, tc))).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let observed: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let fluences: Vec<f64> = pts.iter().map(|p| p.0).collect();

        let mut candidates = vec![CandidateFit::from_predictions(
            "empirical_log",
            3,
            &observed,
            &fluences.iter().map(|&f| fit.eval(f)).collect::<Vec<_>>(),
        )];
        let film = FilmSpec::new(d0)?;
        let composed: hedose_core::Result<Vec<f64>> =
            fluences.iter().map(|&f| tc_vs_fluence(Fluence::new(f)?, &film, &ctx.params)).collect();
        match composed {
            // a_over_vD, nD0_vD, eta_vD23, r_s, A, B
            Ok(pred) => candidates.push(CandidateFit::from_predictions("scaling_composition", 6, &observed, &pred)),
            Err(e) => out.warnings.push(format!("d0={d0} nm: scaling composition unavailable: {e}")),
        }
        match fit_exponential(&pts) {
            Ok(ex) => candidates.push(CandidateFit::from_predictions(
                "exponential",
                2,
                &observed,
                &fluences.iter().map(|&f| ex.eval(f)).collect::<Vec<_>>(),
            )),
            Err(e) => out.warnings.push(format!("d0={d0} nm: exponential fit unavailable: {e}")),
        }
        let ranked = compare_models(&candidates);
        out.summary.push(format!(
            "d0={d0} nm: Tc = -{:.6} ln(F + {:.6}) + {:.6}  rms={:.3e} K",
            fit.a, fit.b, fit.c, fit.residual_rms
        ));
        for r in &ranked {
            out.summary.push(format!("  {}. {:<20} rms={:.4e} K  params={}", r.rank, r.name, r.residual_rms, r.n_params));
        }
        comparisons.insert(format!("{d0}"), ranked);
        fits.push(fit);
    }
    Ok(Outcome { result: json!({ "fits": fits, "comparisons": comparisons }), ..out })
}

pub fn predict_cmd(ctx: &mut Ctx, args: &PredictArgs) -> CliResult<Outcome> {
    let film = match args.oxide {
        Some(ox) => FilmSpec::with_oxide(args.d0, ox)?,
        None => FilmSpec::new(args.d0)?,
    };
    let mut params = ctx.params.clone();
    params.interpolate_thickness |= args.interpolate;
    let mut rows = Vec::new();
    let mut out = Outcome::default();
    for &v in &args.fluence {
        let f = Fluence::new(ctx.fluence("fluence", v)?)?;
        let p = predict(f, &film, &params)?;
        out.summary.push(format!(
            "d0={} nm F={} ions/nm^2 ({:.4e} ions/cm^2): R_sheet={:.1} Ω Tc={:.3} K",
            p.d0_nm,
            p.fluence_per_nm2,
            f.per_cm2(),
            p.r_sheet_ohm,
            p.tc_k
        ));
        out.warnings.extend(p.warnings.iter().cloned());
        rows.push(p);
    }
    Ok(Outcome { result: json!({ "predictions": rows }), ..out })
}
