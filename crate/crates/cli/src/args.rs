use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hedose", version, about = "Helium-ion dose engineering for NbTiN films and detectors")]
pub struct Cli {
    /// Model parameters (TOML); the bundled calibration when omitted.
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,

    /// Directory for reports, tables and plot data.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for stochastic commands.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    /// Unit of fluence values given on the command line.
    #[arg(long, global = true, value_enum, default_value_t = Units::Nm2)]
    pub units: Units,

    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Units {
    /// ions/nm^2
    Nm2,
    /// ions/cm^2
    Cm2,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the sheet-resistance model to film data.
    FitRsheet(FitRsheetArgs),
    /// Fit the thickness-Tc-resistance scaling law.
    FitScaling(DataArgs),
    /// Fit the logarithmic Tc(F) law and compare it with the model.
    FitEmpirical(FitEmpiricalArgs),
    /// Forward prediction for one film.
    Predict(PredictArgs),
    /// Reduce transport measurements.
    #[command(subcommand)]
    Extract(ExtractCommand),
    /// Detector figures of merit.
    #[command(subcommand)]
    Metrics(MetricsCommand),
    /// Fluence needed to reach a target metric.
    Plan(PlanArgs),
    /// Monte Carlo defect-accumulation simulation.
    Simulate(SimulateArgs),
    /// Full report with plot data for films and detectors.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// film_points.csv
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightingArg {
    Auto,
    Unit,
}

#[derive(Debug, Args)]
pub struct FitRsheetArgs {
    /// film_points.csv
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = WeightingArg::Auto)]
    pub weighting: WeightingArg,
    /// Fit ln R instead of R.
    #[arg(long)]
    pub log_residuals: bool,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Start from --params instead of the data-driven initial guess.
    #[arg(long)]
    pub start_from_params: bool,
}

#[derive(Debug, Args)]
pub struct FitEmpiricalArgs {
    /// film_points.csv
    #[arg(long)]
    pub data: PathBuf,
    /// Restrict to one thickness, nm; every thickness with Tc data otherwise.
    #[arg(long)]
    pub d0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Nominal thickness, nm.
    #[arg(long)]
    pub d0: f64,
    /// Fluence in --units.
    #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
    pub fluence: Vec<f64>,
    /// Native oxide thickness, nm.
    #[arg(long)]
    pub oxide: Option<f64>,
    /// Interpolate a_over_vD for thicknesses between calibrated ones.
    #[arg(long)]
    pub interpolate: bool,
}

#[derive(Debug, Subcommand)]
pub enum ExtractCommand {
    /// Critical temperature of R(T) sweeps.
    Tc(ExtractTcArgs),
    /// dB_c2/dT slope and diffusivity from sweeps at several fields.
    Bc2(ExtractBc2Args),
    /// Hall coefficient and electron density.
    Hall(ExtractHallArgs),
    /// van der Pauw sheet resistance.
    Vdp(ExtractVdpArgs),
}

#[derive(Debug, Args)]
pub struct ExtractTcArgs {
    /// rt_sweep.csv, or a directory of them.
    #[arg(long)]
    pub sweep: PathBuf,
    /// Share of the normal-state plateau defining Tc (0.1-0.9).
    #[arg(long, default_value_t = 0.5)]
    pub fraction: f64,
}

#[derive(Debug, Args)]
pub struct ExtractBc2Args {
    /// Directory of rt_sweep CSV files, one field per file.
    #[arg(long)]
    pub sweeps: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub fraction: f64,
    /// Largest field used in the fit, T.
    #[arg(long, default_value_t = 1.0)]
    pub max_field: f64,
    /// Keep only the N highest-Tc points.
    #[arg(long)]
    pub highest_n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExtractHallArgs {
    /// hall_sweep.csv
    #[arg(long)]
    pub sweep: PathBuf,
    /// Film thickness, nm.
    #[arg(long)]
    pub d0: f64,
}

#[derive(Debug, Args)]
pub struct ExtractVdpArgs {
    /// First four-terminal resistance, ohm.
    #[arg(long)]
    pub ra: f64,
    /// Second four-terminal resistance, ohm.
    #[arg(long)]
    pub rb: f64,
}

#[derive(Debug, Args)]
pub struct DetectorArgs {
    /// detectors.csv, or the directory holding it and counts_<id>.csv files.
    #[arg(long)]
    pub detectors: PathBuf,
}

#[derive(Debug, Args)]
pub struct MaterialArgs {
    /// Readout load, ohm.
    #[arg(long, default_value_t = 50.0)]
    pub r_load: f64,
    /// Gap as a multiple of k_B Tc.
    #[arg(long, default_value_t = 1.764)]
    pub gap_ratio: f64,
}

#[derive(Debug, Subcommand)]
pub enum MetricsCommand {
    /// System detection efficiency per bias point.
    Sde(DetectorArgs),
    /// Switching-current density.
    Jsw(DetectorArgs),
    /// Kinetic inductance.
    Lk {
        #[command(flatten)]
        detectors: DetectorArgs,
        #[command(flatten)]
        material: MaterialArgs,
    },
    /// Decay time.
    Tau {
        #[command(flatten)]
        detectors: DetectorArgs,
        #[command(flatten)]
        material: MaterialArgs,
    },
    /// Saturation of SDE versus bias.
    Saturation {
        #[command(flatten)]
        detectors: DetectorArgs,
        /// Share of the bias range tested for a plateau.
        #[arg(long, default_value_t = 0.1)]
        window: f64,
        /// Largest relative rise still counted as a plateau.
        #[arg(long, default_value_t = 0.02)]
        threshold: f64,
    },
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// r_sheet, tc, tau or jsw.
    #[arg(long)]
    pub kind: String,
    /// Target in the metric's SI unit (ohm, K, s, A/m^2).
    #[arg(long)]
    pub value: f64,
    /// Bare film thickness, nm (film targets only).
    #[arg(long, conflicts_with = "detectors")]
    pub d0: Option<f64>,
    /// detectors.csv or its directory; plans every detector.
    #[arg(long)]
    pub detectors: Option<PathBuf>,
    /// anchors.csv with pre-irradiation values; turns the plan into a trim plan.
    #[arg(long, requires = "detectors")]
    pub anchors: Option<PathBuf>,
    /// Upper end of the fluence search, in --units.
    #[arg(long)]
    pub f_max: Option<f64>,
    #[arg(long, default_value_t = 50.0)]
    pub r_load: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 256)]
    pub nx: usize,
    #[arg(long, default_value_t = 256)]
    pub ny: usize,
    /// Element traversals per ion (may be fractional).
    #[arg(long, default_value_t = 8.0)]
    pub depth: f64,
    /// Creation probability per traversal.
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    #[arg(long, default_value_t = 32)]
    pub replicas: usize,
    /// Cumulative fluence grid in --units.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 50.0, 100.0, 200.0, 400.0, 800.0, 1600.0, 2600.0])]
    pub fluences: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// film_points.csv
    #[arg(long)]
    pub data: PathBuf,
    /// detectors.csv or its directory.
    #[arg(long)]
    pub detectors: Option<PathBuf>,
    /// Use --params as given instead of refitting the film data.
    #[arg(long)]
    pub no_fit: bool,
}
