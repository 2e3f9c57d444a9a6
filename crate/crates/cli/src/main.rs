//! `homog`: construct, analyze and validate slow-manifold homogenizations.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Serialize)]
#[command(name = "homog", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "snake_case", tag = "command")]
enum Command {
    /// Construct the homogenized PDE and write it as canonical JSON.
    Construct(ConstructArgs),
    /// Estimate the convergence-limiting singularity at one amplitude.
    Analyze(AnalyzeArgs),
    /// Singularity estimates over a grid of amplitudes.
    Sweep(SweepArgs),
    /// Bloch dispersion against the homogenized series.
    Bloch(BlochArgs),
    /// Time-stepping cross-validation of homogenized models.
    Simulate(SimulateArgs),
    /// Mesoscale construction with compact-form and two-step checks.
    Meso(MesoArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum FamilyArg {
    Quasi,
    Single,
}

#[derive(Args, Serialize)]
struct ConstructArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Derivative order `N_d`.
    #[arg(long)]
    order: u32,
    /// Amplitude order `N_a`; defaults to `N_d`.
    #[arg(long)]
    a_order: Option<u32>,
    /// Exact decimal values substituted into the coefficients.
    #[arg(long)]
    a1: Option<String>,
    #[arg(long)]
    a2: Option<String>,
    #[arg(long)]
    k1: Option<String>,
    #[arg(long)]
    k2: Option<String>,
    #[arg(long, default_value = "pde.json")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum ModeArg {
    Auto,
    Ds,
    Mr,
}

#[derive(Args, Serialize)]
struct AnalyzeArgs {
    /// Single-period PDE from `construct`.
    #[arg(long, required_unless_present = "series_file", conflicts_with = "series_file")]
    pde: Option<PathBuf>,
    /// Plain coefficients `f_0 f_1 …` of a series in `z`, whitespace or comma separated.
    #[arg(long)]
    series_file: Option<PathBuf>,
    /// Amplitude, required with `--pde`.
    #[arg(long, required_unless_present = "series_file")]
    a: Option<String>,
    #[arg(long, value_enum, default_value = "auto")]
    mode: ModeArg,
    #[arg(long, default_value = "est.csv")]
    out: PathBuf,
    /// Per-index ratio data of the chosen estimator.
    #[arg(long)]
    ratios: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SweepArgs {
    /// Single-period PDE from `construct`; otherwise one is constructed.
    #[arg(long)]
    pde: Option<PathBuf>,
    /// Order of the construction when no `--pde` is given.
    #[arg(long, default_value_t = 34)]
    orders: u32,
    /// `lo:hi:step`, exact decimals.
    #[arg(long, default_value = "0.025:0.975:0.05")]
    a_grid: String,
    #[arg(long, value_enum, default_value = "auto")]
    mode: ModeArg,
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct BlochArgs {
    #[arg(long)]
    a: String,
    #[arg(long, default_value_t = 0.0)]
    kmin: f64,
    #[arg(long)]
    kmax: f64,
    #[arg(long, default_value_t = 51)]
    points: usize,
    /// Series truncations `N` to tabulate.
    #[arg(long, value_delimiter = ',', default_value = "2,4,6")]
    truncations: Vec<usize>,
    /// Fourier modes `M` (basis `−M..=M`); chosen from the decay of `κ̂` by default.
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long, default_value = "bloch.csv")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum ModelArg {
    N2,
    N4,
    Reg,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    #[arg(long)]
    a: String,
    /// Domain lengths in microscale periods.
    #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
    periods: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_enum, default_value = "n2,n4,reg")]
    models: Vec<ModelArg>,
    /// Order of the slow-manifold lift of the initial condition.
    #[arg(long, default_value_t = 6)]
    lift_order: u32,
    #[arg(long, default_value_t = 64)]
    points_per_period: usize,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value = "simulate.csv")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum BasisArg {
    B,
    C,
}

#[derive(Args, Serialize)]
struct MesoArgs {
    /// Slow order `N_slow`.
    #[arg(long)]
    order: u32,
    /// `a2` truncation; defaults to `N_slow + 2`.
    #[arg(long)]
    a_order: Option<u32>,
    #[arg(long, value_enum, default_value = "c")]
    basis: BasisArg,
    /// Derivative order of the two-step versus one-step comparison.
    #[arg(long, default_value_t = 2)]
    two_step_order: u32,
    #[arg(long, default_value = "meso.json")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    eprintln!("config: {}", serde_json::to_string(&cli).expect("serializable config"));
    let run = match &cli.command {
        Command::Construct(a) => commands::construct_cmd(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Bloch(a) => commands::bloch(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Meso(a) => commands::meso(a),
    };
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
