use hedose_core::io::{trajectory_csv, TrajectoryRow};
use hedose_core::oracle::{simulate_ensemble, EnsembleConfig, LatticeSpec};
use serde_json::json;

use crate::args::SimulateArgs;
use crate::context::{CliResult, Ctx, Outcome};

pub fn run(ctx: &Ctx, args: &SimulateArgs) -> CliResult<Outcome> {
    let fluence_grid = args.fluences.iter().map(|&f| ctx.fluence("fluences", f)).collect::<CliResult<Vec<_>>>()?;
    let cfg = EnsembleConfig {
        lattice: LatticeSpec {
            nx: args.nx,
            ny: args.ny,
            depth: args.depth,
            eta: args.eta,
            initial_fraction: ctx.params.nd0_vd,
        },
        eta_vd23: ctx.params.eta_vd23,
        fluence_grid,
        replicas: args.replicas,
        base_seed: ctx.seed,
    };
    let points = simulate_ensemble(&cfg)?;

    let mut out = Outcome::default();
    let mut worst: f64 = 0.0;
    for p in &points {
        let z = if p.stderr > 0.0 { (p.mean - p.closed_form) / p.stderr } else { 0.0 };
        worst = worst.max(z.abs());
        out.summary.push(format!(
            "F={:>8.2} ions/nm^2  ions={:>9}  fraction={:.6} ± {:.2e}  closed form {:.6}  z={z:+.2}",
            p.realized_fluence_per_nm2, p.ions, p.mean, p.stderr, p.closed_form
        ));
    }
    out.summary.push(format!("largest |z| = {worst:.2}"));
    let rows: Vec<TrajectoryRow> = points
        .iter()
        .map(|p| TrajectoryRow { fluence_per_nm2: p.realized_fluence_per_nm2, occupied_fraction: p.mean, stderr: p.stderr })
        .collect();
    out.result = json!({ "config": cfg, "points": points, "max_abs_z": worst });
    Ok(out.file("trajectory.csv", trajectory_csv(&rows)))
}
