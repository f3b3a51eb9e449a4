//! Command-line front end: simulations, fluid limits, rate functions,
//! variational problems, cut distances and figure reproduction.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for failures
//! during the computation.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;
mod repro;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use graphon_paths::dynamics::Variant;

use config::{overlay, ConfigError};

#[derive(Parser)]
#[command(name = "graphon-paths", version, about = "Graphon-valued processes driven by vertex ages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON file with option values; flags given on the command line win.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory (default: $GRAPHON_PATHS_OUT/<command>, else runs/<command>).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a graph process and write snapshots, triangles and a summary.
    Simulate(SimulateArgs),
    /// Solve the fluid equation along the limiting or a recorded type path.
    Fluid(FluidArgs),
    /// Evaluate the path rate of a measure path of ages.
    Rate(RateArgs),
    /// Minimise relative entropy under an edge-density constraint.
    Optimize(OptimizeArgs),
    /// Cut distance between two graphons.
    Cutdist(CutdistArgs),
    /// Reproduce a reference figure (fig1, fig2, fig-triangles, fig3).
    Repro(ReproArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Edge dynamics (required).
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Number of vertices (required).
    #[arg(long)]
    n: Option<usize>,
    /// Clock rate of the vertex resets.
    #[arg(long)]
    gamma: Option<f64>,
    /// Time horizon.
    #[arg(long = "T")]
    horizon: Option<f64>,
    /// Activation rate of the illustrative model.
    #[arg(long)]
    lambda: Option<f64>,
    /// Base activation rate.
    #[arg(long)]
    lambda0: Option<f64>,
    /// Activation gain per unit of triangle density.
    #[arg(long)]
    lambda_tri: Option<f64>,
    /// Deactivation gain on the squared age difference.
    #[arg(long)]
    mu_age: Option<f64>,
    /// Upper bound on both rates.
    #[arg(long)]
    cmax: Option<f64>,
    /// Comma-separated snapshot times (default: the horizon).
    #[arg(long, value_delimiter = ',')]
    snapshots: Option<Vec<f64>>,
    /// Number of equal steps of the triangle-density series.
    #[arg(long)]
    series_steps: Option<usize>,
    /// Number of equal steps of the recorded driving path.
    #[arg(long)]
    path_steps: Option<usize>,
    /// Random seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum VariantArg {
    Illustrative,
    MeanField,
    FrozenUniform,
}

impl From<VariantArg> for Option<Variant> {
    fn from(v: VariantArg) -> Self {
        Some(match v {
            VariantArg::Illustrative => Variant::Illustrative,
            VariantArg::MeanField => Variant::MeanField,
            VariantArg::FrozenUniform => Variant::FrozenUniform,
        })
    }
}

#[derive(Args)]
struct FluidArgs {
    #[command(flatten)]
    common: Common,
    /// Resolution of the output graphons.
    #[arg(long)]
    m: Option<usize>,
    /// Time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Clock rate of the vertex resets.
    #[arg(long)]
    gamma: Option<f64>,
    /// Base activation rate.
    #[arg(long)]
    lambda0: Option<f64>,
    /// Activation gain per unit of triangle density.
    #[arg(long)]
    lambda_tri: Option<f64>,
    /// Deactivation gain on the squared age difference.
    #[arg(long)]
    mu_age: Option<f64>,
    /// Upper bound on both rates.
    #[arg(long)]
    cmax: Option<f64>,
    /// Comma-separated snapshot times, multiples of dt (default: sixths of [0, 1]).
    #[arg(long, value_delimiter = ',')]
    snapshots: Option<Vec<f64>>,
    /// Steps between recomputations of the triangle density.
    #[arg(long)]
    triangle_stride: Option<usize>,
    /// Recorded driving path (JSON with "times" and "samples").
    #[arg(long, value_name = "FILE")]
    driving_path: Option<PathBuf>,
}

#[derive(Args)]
struct RateArgs {
    #[command(flatten)]
    common: Common,
    /// Measure path (JSON with "times", "h" and "masses"; required).
    #[arg(long, value_name = "FILE")]
    path: Option<PathBuf>,
    /// Clock rate of the vertex resets.
    #[arg(long)]
    gamma: Option<f64>,
    /// Expected cell width; must match the file.
    #[arg(long)]
    h: Option<f64>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    common: Common,
    /// Reference law (required): `x:w,...` or `model:gamma,lambda,T,bins`.
    #[arg(long = "Q")]
    q: Option<String>,
    /// Edge-density target.
    #[arg(long)]
    estar: Option<f64>,
    /// Grid of targets as `lo:hi:step`.
    #[arg(long)]
    estar_grid: Option<String>,
    /// at-most or at-least (required).
    #[arg(long)]
    direction: Option<String>,
    /// Number of starting points for the upper tail.
    #[arg(long)]
    starts: Option<usize>,
    /// Random seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CutdistArgs {
    #[command(flatten)]
    common: Common,
    /// First graphon (required): `const:p[:m]` or `csv:PATH`.
    #[arg(long)]
    a: Option<String>,
    /// Second graphon (required), same forms as --a.
    #[arg(long)]
    b: Option<String>,
    /// Restarts of the alternating cut-norm search.
    #[arg(long)]
    restarts: Option<usize>,
    /// Blocks of the permutation-minimised cut metric (at most 8).
    #[arg(long)]
    max_blocks: Option<usize>,
    /// Random seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ReproArgs {
    /// Output directory (default: $GRAPHON_PATHS_OUT/repro-<figure>, else runs/repro-<figure>).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// One of fig1, fig2, fig-triangles, fig3.
    figure: String,
}

fn run(command: Command) -> anyhow::Result<PathBuf> {
    match command {
        Command::Simulate(a) => {
            let mut cfg: config::SimulateConfig = config::load(a.common.config.as_deref())?;
            overlay!(
                cfg, a, variant, n, gamma, horizon, lambda, lambda0, lambda_tri, mu_age, cmax, snapshots,
                series_steps, path_steps, seed
            );
            commands::simulate(&mut cfg, a.common.out.as_deref())
        }
        Command::Fluid(a) => {
            let mut cfg: config::FluidRunConfig = config::load(a.common.config.as_deref())?;
            overlay!(cfg, a, m, dt, gamma, lambda0, lambda_tri, mu_age, cmax, snapshots, triangle_stride, driving_path);
            commands::fluid(&mut cfg, a.common.out.as_deref())
        }
        Command::Rate(a) => {
            let mut cfg: config::RateConfig = config::load(a.common.config.as_deref())?;
            overlay!(cfg, a, path, gamma, h);
            commands::rate(&mut cfg, a.common.out.as_deref())
        }
        Command::Optimize(a) => {
            let mut cfg: config::OptimizeConfig = config::load(a.common.config.as_deref())?;
            overlay!(cfg, a, q, estar, estar_grid, direction, starts, seed);
            commands::optimize(&mut cfg, a.common.out.as_deref())
        }
        Command::Cutdist(a) => {
            let mut cfg: config::CutdistConfig = config::load(a.common.config.as_deref())?;
            overlay!(cfg, a, a, b, restarts, max_blocks, seed);
            commands::cutdist(&mut cfg, a.common.out.as_deref())
        }
        Command::Repro(a) => repro::repro(&a.figure, a.out.as_deref()),
    }
}

fn subcommand_name(command: &Command) -> &'static str {
    match command {
        Command::Simulate(_) => "simulate",
        Command::Fluid(_) => "fluid",
        Command::Rate(_) => "rate",
        Command::Optimize(_) => "optimize",
        Command::Cutdist(_) => "cutdist",
        Command::Repro(_) => "repro",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let name = subcommand_name(&cli.command);
    match run(cli.command) {
        Ok(dir) => {
            eprintln!("wrote {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) if e.downcast_ref::<ConfigError>().is_some() => {
            eprintln!("error: {e}");
            let mut cmd = Cli::command();
            cmd.build();
            if let Some(sub) = cmd.find_subcommand_mut(name) {
                eprintln!("\n{}", sub.render_usage());
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
