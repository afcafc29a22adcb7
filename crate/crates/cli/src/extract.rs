use std::path::{Path, PathBuf};

use hedose_core::io::{parse_hall_sweep, parse_rt_sweep, read_text};
use hedose_core::transport::{
    diffusivity, extract_bc2_slope, extract_hall, extract_tc, vdp_sheet_resistance, Bc2Options, TcOptions,
    TransportSweep,
};
use hedose_core::Error;
use serde_json::json;

use crate::args::{ExtractBc2Args, ExtractCommand, ExtractHallArgs, ExtractTcArgs, ExtractVdpArgs};
use crate::context::{CliResult, Context, Ctx, Outcome};

pub fn run(ctx: &mut Ctx, cmd: &ExtractCommand) -> CliResult<Outcome> {
    match cmd {
        ExtractCommand::Tc(a) => tc(ctx, a),
        ExtractCommand::Bc2(a) => bc2(ctx, a),
        ExtractCommand::Hall(a) => hall(ctx, a),
        ExtractCommand::Vdp(a) => vdp(a),
    }
}

/// `path` itself, or every `*.csv` inside it in name order.
fn csv_files(path: &Path) -> CliResult<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let io_err = |e: std::io::Error| Error::Io { path: path.display().to_string(), message: e.to_string() };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(path).map_err(io_err)? {
        let p = entry.map_err(io_err)?.path();
        if p.extension().is_some_and(|e| e == "csv") {
            files.push(p);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Error::InsufficientData(format!("no .csv files in {}", path.display())).into());
    }
    Ok(files)
}

fn load_sweeps(ctx: &mut Ctx, path: &Path) -> CliResult<Vec<(PathBuf, TransportSweep)>> {
    csv_files(path)?
        .into_iter()
        .map(|f| {
            ctx.input(&f);
            let sweep = parse_rt_sweep(&read_text(&f)?, &f.display().to_string())?;
            Ok((f, sweep))
        })
        .collect()
}

fn tc_options(fraction: f64) -> CliResult<TcOptions> {
    if !(0.1..=0.9).contains(&fraction) {
        return Err(Error::invalid("--fraction", format!("must lie in [0.1, 0.9], got {fraction}")).into());
    }
    Ok(TcOptions { fraction })
}

fn tc(ctx: &mut Ctx, args: &ExtractTcArgs) -> CliResult<Outcome> {
    let opts = tc_options(args.fraction)?;
    let mut rows = Vec::new();
    let mut out = Outcome::default();
    for (file, sweep) in load_sweeps(ctx, &args.sweep)? {
        let name = file.display().to_string();
        let tc = extract_tc(&sweep, &opts).context(|| name.clone())?;
        let field = sweep.field().context(|| name.clone())?;
        out.summary.push(format!("{name}: B={field} T Tc={tc:.4} K"));
        rows.push(json!({ "file": name, "field_T": field, "tc_K": tc }));
    }
    Ok(Outcome { result: json!({ "fraction": opts.fraction, "sweeps": rows }), ..out })
}

fn bc2(ctx: &mut Ctx, args: &ExtractBc2Args) -> CliResult<Outcome> {
    let opts = Bc2Options { tc: tc_options(args.fraction)?, max_field: args.max_field, highest_n: args.highest_n };
    let sweeps: Vec<TransportSweep> = load_sweeps(ctx, &args.sweeps)?.into_iter().map(|s| s.1).collect();
    let slope = extract_bc2_slope(&sweeps, &opts)?;
    let d = diffusivity(slope.slope)?;
    Ok(Outcome::new(json!({
        "slope_T_per_K": slope.slope,
        "slope_sigma_T_per_K": slope.slope_sigma,
        "diffusivity_m2_per_s": d,
        "points": slope.points.iter().map(|&(tc, b)| json!({ "tc_K": tc, "field_T": b })).collect::<Vec<_>>(),
    }))
    .line(format!("dBc2/dT={:.5} ± {:.2e} T/K  D={:.5e} m^2/s", slope.slope, slope.slope_sigma, d)))
}

fn hall(ctx: &mut Ctx, args: &ExtractHallArgs) -> CliResult<Outcome> {
    ctx.input(&args.sweep);
    let sweep = parse_hall_sweep(&read_text(&args.sweep)?, &args.sweep.display().to_string(), args.d0)?;
    let h = extract_hall(&sweep).context(|| args.sweep.display().to_string())?;
    Ok(Outcome::new(h).line(format!("R_H={:.5e} m^3/C  n_e={:.5e} m^-3", h.r_h, h.n_e)))
}

fn vdp(args: &ExtractVdpArgs) -> CliResult<Outcome> {
    let r = vdp_sheet_resistance(args.ra, args.rb)?;
    Ok(Outcome::new(json!({ "r_a_ohm": args.ra, "r_b_ohm": args.rb, "r_sheet_ohm": r })).line(format!("R_sheet={r:.3} Ω")))
}
