use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "gda",
    version,
    about = "Spectral analysis and simulation of gradient descent-ascent on quadratic minimax games"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues and spectral radius of one update operator.
    Spectrum(Opts),
    /// Grid-search the step size (and momentum for nm) minimising the spectral radius.
    Tune(Opts),
    /// Iterate an algorithm and write the distance-to-equilibrium trajectory.
    Run(Opts),
    /// Check an eigenvalue bound; exits with status 1 on any violation.
    Check(Opts),
    /// Trajectories of Sim-GDA and Alt-GDA on three 1x1 games.
    Fig1(Opts),
    /// Operator eigenvalues along a step-size sweep, with convergence circles.
    Fig2(Opts),
    /// Distance-to-optimum curves of tuned methods on a d=100 instance.
    #[command(name = "fig3-left")]
    Fig3Left(Opts),
    /// Tuned spectral radius against condition number, with log-log slopes.
    #[command(name = "fig3-right")]
    Fig3Right(Opts),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Tune(_) => "tune",
            Command::Run(_) => "run",
            Command::Check(_) => "check",
            Command::Fig1(_) => "fig1",
            Command::Fig2(_) => "fig2",
            Command::Fig3Left(_) => "fig3-left",
            Command::Fig3Right(_) => "fig3-right",
        }
    }

    pub fn opts(&self) -> &Opts {
        match self {
            Command::Spectrum(o)
            | Command::Tune(o)
            | Command::Run(o)
            | Command::Check(o)
            | Command::Fig1(o)
            | Command::Fig2(o)
            | Command::Fig3Left(o)
            | Command::Fig3Right(o) => o,
        }
    }
}

/// Flags shared by every subcommand. Any flag may also be given in the
/// `--config` file as `name = value` using the long flag name; flags win.
#[derive(Debug, Default, Clone, Args)]
pub struct Opts {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory. Without it, analysis commands print to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat key=value file supplying defaults for any flag.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Game file as written by the library's text export.
    #[arg(long)]
    pub game_file: Option<PathBuf>,
    /// Inline 1x1 game: f = a/2 x^2 + b x y - c/2 y^2.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Generator: scsc, scsc-rotated, scaling, bilinear, strong-concave-only.
    #[arg(long)]
    pub generator: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Second dimension for rectangular generators.
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub coupling_std: Option<f64>,
    /// Largest n_i for the scaling generator.
    #[arg(long)]
    pub n_max: Option<f64>,
    /// Algorithm; repeatable. One of sim_gda, alt_gda, eg, ogda_sim, ogda_alt, nm.
    #[arg(long)]
    pub algo: Vec<String>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// `log:lo:hi:n`, `lin:lo:hi:n` or a comma-separated list.
    #[arg(long)]
    pub eta_grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta_grid: Option<String>,
    /// bilinear_sim, bilinear_alt, sim_scsc, alt_scsc, sim_nosc, alt_nosc.
    #[arg(long)]
    pub theorem: Option<String>,
    /// Iteration cap for run.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Initial point as a comma-separated list (default: all ones).
    #[arg(long, allow_hyphen_values = true)]
    pub init: Option<String>,
    #[arg(long)]
    pub stop: Option<f64>,
    #[arg(long)]
    pub ceiling: Option<f64>,
    /// fig3-right: values of N, as a grid spec.
    #[arg(long)]
    pub n_values: Option<String>,
    /// fig3-right: number of seeds per N, starting at --seed.
    #[arg(long)]
    pub seeds: Option<usize>,
}
