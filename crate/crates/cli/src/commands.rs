//! Subcommand dispatch.

use anyhow::{anyhow, bail, Context, Result};
use gda_core::dynamics::{run, RunOptions, DEFAULT_CEILING, DEFAULT_MAX_ITERS, DEFAULT_STOP};
use gda_core::spectral::{
    analyze, check, default_beta_grid, default_eta_grid, prescribed_step, tune, TheoremId,
};
use gda_core::{Algorithm, AlgorithmConfig};

use crate::args::Opts;
use crate::experiments::{self as ex, Fig3LeftParams, Fig3RightParams};
use crate::output::OutputFile;
use crate::settings::{algorithms, game, parse_grid, parse_list};

/// Files produced by a command, plus extra header lines and, for `check`,
/// whether every bound held.
pub struct Outcome {
    pub files: Vec<OutputFile>,
    pub header_extra: Vec<String>,
    pub passed: Option<bool>,
    /// Figure commands always write files; this is their directory when
    /// `--out` is absent.
    pub default_dir: Option<&'static str>,
}

impl Outcome {
    fn analysis(files: Vec<OutputFile>) -> Self {
        Self {
            files,
            header_extra: Vec::new(),
            passed: None,
            default_dir: None,
        }
    }

    fn figure(files: Vec<OutputFile>, header_extra: Vec<String>, dir: &'static str) -> Self {
        Self {
            files,
            header_extra,
            passed: None,
            default_dir: Some(dir),
        }
    }
}

fn eta_grid(o: &Opts) -> Result<Vec<f64>> {
    o.eta_grid
        .as_deref()
        .map_or_else(|| Ok(default_eta_grid()), parse_grid)
}

fn beta_grid(o: &Opts) -> Result<Vec<f64>> {
    o.beta_grid
        .as_deref()
        .map_or_else(|| Ok(default_beta_grid()), parse_grid)
}

fn single_algorithm(o: &Opts) -> Result<Algorithm> {
    let algos = algorithms(o, &[Algorithm::AltGda])?;
    match algos[..] {
        [a] => Ok(a),
        _ => bail!("this command takes a single --algo"),
    }
}

fn config(o: &Opts) -> Result<AlgorithmConfig> {
    let algorithm = single_algorithm(o)?;
    let eta = o.eta.ok_or_else(|| anyhow!("--eta is required"))?;
    let beta = if algorithm.uses_momentum() {
        Some(o.beta.ok_or_else(|| anyhow!("--algo nm needs --beta"))?)
    } else {
        if o.beta.is_some() {
            bail!("--beta only applies to nm");
        }
        None
    };
    Ok(AlgorithmConfig::new(algorithm, eta, beta)?)
}

pub fn spectrum(o: &Opts) -> Result<Outcome> {
    let g = game(o)?;
    let report = analyze(&g, config(o)?)?;
    Ok(Outcome::analysis(vec![OutputFile::new(
        "spectrum.txt",
        report.to_text(),
    )]))
}

pub fn tune_cmd(o: &Opts) -> Result<Outcome> {
    let g = game(o)?;
    let etas = eta_grid(o)?;
    let betas = beta_grid(o)?;
    let mut body = String::from("algo,eta_star,beta_star,rho\n");
    for algorithm in algorithms(o, &Algorithm::ALL)? {
        let (cfg, report) = tune(
            &g,
            algorithm,
            &etas,
            algorithm.uses_momentum().then_some(&betas[..]),
        )?;
        let beta = cfg
            .beta
            .map_or_else(|| "none".to_string(), |b| format!("{b:.16e}"));
        body.push_str(&format!(
            "{algorithm},{:.16e},{beta},{:.16e}\n",
            cfg.eta, report.rho
        ));
    }
    Ok(Outcome::analysis(vec![OutputFile::new("tune.csv", body)]))
}

pub fn run_cmd(o: &Opts) -> Result<Outcome> {
    let g = game(o)?;
    let cfg = config(o)?;
    let z0 = match &o.init {
        Some(list) => parse_list(list).context("--init")?,
        None => vec![1.0; g.dim()],
    };
    let opts = RunOptions {
        max_iters: o.steps.unwrap_or(DEFAULT_MAX_ITERS),
        stop: o.stop.unwrap_or(DEFAULT_STOP),
        ceiling: o.ceiling.unwrap_or(DEFAULT_CEILING),
        ..Default::default()
    };
    let traj = run(&g, cfg, &z0, &opts)?;
    Ok(Outcome::analysis(vec![OutputFile::new(
        "trajectory.csv",
        traj.to_csv(),
    )]))
}

pub fn check_cmd(o: &Opts) -> Result<Outcome> {
    let g = game(o)?;
    let name = o
        .theorem
        .as_deref()
        .ok_or_else(|| anyhow!("--theorem is required"))?;
    let theorem: TheoremId = name.parse()?;
    let eta = match o.eta {
        Some(eta) => eta,
        None => match prescribed_step(&g, theorem) {
            Some(eta) => eta,
            None => {
                // Surface the checker's own regime error when there is one.
                check(&g, theorem, f64::MIN_POSITIVE)?;
                bail!("{theorem} has no prescribed step size; pass --eta")
            }
        },
    };
    let report = check(&g, theorem, eta)?;
    let passed = report.bounds.as_ref().is_some_and(|b| b.passed());
    let mut out = Outcome::analysis(vec![OutputFile::new("check.txt", report.to_text())]);
    out.passed = Some(passed);
    Ok(out)
}

pub fn fig1(_o: &Opts) -> Result<Outcome> {
    let runs = ex::fig1()?;
    Ok(Outcome::figure(ex::fig1_files(&runs), Vec::new(), "fig1"))
}

pub fn fig2(o: &Opts) -> Result<Outcome> {
    let etas = o
        .eta_grid
        .as_deref()
        .map_or_else(|| Ok(ex::fig2_default_grid()), parse_grid)?;
    let f = ex::fig2(&etas)?;
    let note = vec![format!(
        "eta grid: {} points from {:e} to {:e}",
        etas.len(),
        etas[0],
        etas[etas.len() - 1]
    )];
    Ok(Outcome::figure(ex::fig2_files(&f), note, "fig2"))
}

pub fn fig3_left(o: &Opts) -> Result<Outcome> {
    let d = Fig3LeftParams::default();
    let p = Fig3LeftParams {
        dim: o.dim.unwrap_or(d.dim),
        seed: o.seed.unwrap_or(d.seed),
        coupling_std: o.coupling_std.unwrap_or(d.coupling_std),
        algorithms: algorithms(o, &d.algorithms)?,
        eta_grid: eta_grid(o)?,
        beta_grid: beta_grid(o)?,
        max_iters: o.steps.unwrap_or(d.max_iters),
        stop: o.stop.unwrap_or(d.stop),
    };
    let f = ex::fig3_left(&p)?;
    let mut note = ex::extension_note(&p.algorithms);
    note.push(format!(
        "instance: scsc dim={} coupling_std={}",
        p.dim, p.coupling_std
    ));
    Ok(Outcome::figure(ex::fig3_left_files(&f), note, "fig3-left"))
}

pub fn fig3_right(o: &Opts) -> Result<Outcome> {
    let d = Fig3RightParams::default();
    let p = Fig3RightParams {
        dim: o.dim.unwrap_or(d.dim),
        n_values: o
            .n_values
            .as_deref()
            .map_or_else(|| Ok(d.n_values.clone()), parse_grid)?,
        seed: o.seed.unwrap_or(d.seed),
        seeds: o.seeds.unwrap_or(d.seeds),
        algorithms: algorithms(o, &d.algorithms)?,
        eta_grid: eta_grid(o)?,
        beta_grid: beta_grid(o)?,
    };
    let f = ex::fig3_right(&p)?;
    let mut note = ex::extension_note(&p.algorithms);
    note.push(format!(
        "instances: scaling dim={} with {} values of N and {} seeds each",
        p.dim,
        p.n_values.len(),
        p.seeds
    ));
    Ok(Outcome::figure(
        ex::fig3_right_files(&f),
        note,
        "fig3-right",
    ))
}
