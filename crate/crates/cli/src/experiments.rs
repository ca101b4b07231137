//! Figure reproductions. Each experiment returns structured results and a
//! separate function renders them as CSV files.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use gda_core::dynamics::{estimate_rate, run, RunOptions, Trajectory, DEFAULT_TAIL_FRACTION};
use gda_core::games::{gen_scaling_instance, gen_scsc};
use gda_core::linalg::eigenvalues;
use gda_core::spectral::{default_beta_grid, default_eta_grid, log_space, tune};
use gda_core::{Algorithm, AlgorithmConfig, QuadraticGame, UpdateOperator};
use rayon::prelude::*;

use crate::output::OutputFile;

/// Sim-GDA, Alt-GDA, EG, OGDA-Sim and NM, in that order.
pub const FIG3_METHODS: [Algorithm; 5] = [
    Algorithm::SimGda,
    Algorithm::AltGda,
    Algorithm::Eg,
    Algorithm::OgdaSim,
    Algorithm::Nm,
];
/// Reported alongside the five main methods and flagged as an extension.
pub const FIG3_EXTENSION: Algorithm = Algorithm::OgdaAlt;

pub const FIG3_TARGET: f64 = 1e-10;

pub fn fig3_algorithms() -> Vec<Algorithm> {
    let mut v = FIG3_METHODS.to_vec();
    v.push(FIG3_EXTENSION);
    v
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |b| format!("{b:.16e}"))
}

// ---------------------------------------------------------------- fig1

pub struct Fig1Run {
    /// File stem, e.g. `alt_scsc`.
    pub name: String,
    pub trajectory: Trajectory,
}

pub fn fig1_games() -> Result<[(&'static str, QuadraticGame); 3]> {
    Ok([
        ("bilinear", QuadraticGame::scalar(0.0, 10.0, 0.0)?),
        ("scsc", QuadraticGame::scalar(1.0, 10.0, 1.0)?),
        ("nosc", QuadraticGame::scalar(0.0, 10.0, 2.0)?),
    ])
}

/// Sim-GDA at η=0.01 for 100 steps and Alt-GDA at η=0.08 for 20 steps on
/// each game, from (1, 1).
pub fn fig1() -> Result<Vec<Fig1Run>> {
    let setups = [
        ("sim", AlgorithmConfig::sim(0.01)?, 100),
        ("alt", AlgorithmConfig::alt(0.08)?, 20),
    ];
    let mut runs = Vec::new();
    for (prefix, cfg, steps) in setups {
        for (game_name, g) in fig1_games()? {
            let opts = RunOptions {
                max_iters: steps,
                stop: f64::NEG_INFINITY,
                ceiling: f64::INFINITY,
                record_states: Some(true),
                ..Default::default()
            };
            let trajectory = run(&g, cfg, &[1.0, 1.0], &opts)?;
            runs.push(Fig1Run {
                name: format!("{prefix}_{game_name}"),
                trajectory,
            });
        }
    }
    Ok(runs)
}

pub fn fig1_files(runs: &[Fig1Run]) -> Vec<OutputFile> {
    runs.iter()
        .map(|r| OutputFile::new(format!("{}.csv", r.name), r.trajectory.to_csv()))
        .collect()
}

// ---------------------------------------------------------------- fig2

pub struct EigenRow {
    pub algorithm: Algorithm,
    pub eta: f64,
    pub re: f64,
    pub im: f64,
}

pub struct Circle {
    pub algorithm: Algorithm,
    pub eta_star: f64,
    pub radius: f64,
}

pub struct Fig2 {
    pub rows: Vec<EigenRow>,
    pub circles: Vec<Circle>,
}

pub fn fig2_game() -> Result<QuadraticGame> {
    Ok(QuadraticGame::scalar(0.6, 1.2, 0.6)?)
}

pub fn fig2_default_grid() -> Vec<f64> {
    log_space(1e-3, 1.0, 100)
}

/// Operator eigenvalues of Sim-GDA and Alt-GDA at each step size, and the
/// radius each method reaches at its best step size on the same grid.
pub fn fig2(etas: &[f64]) -> Result<Fig2> {
    let g = fig2_game()?;
    let mut rows = Vec::new();
    let mut circles = Vec::new();
    for algorithm in [Algorithm::SimGda, Algorithm::AltGda] {
        for &eta in etas {
            let op = UpdateOperator::build(&g, AlgorithmConfig::new(algorithm, eta, None)?)?;
            for z in eigenvalues(&op.matrix)?.values() {
                rows.push(EigenRow {
                    algorithm,
                    eta,
                    re: z.re,
                    im: z.im,
                });
            }
        }
        let (cfg, report) = tune(&g, algorithm, etas, None)?;
        circles.push(Circle {
            algorithm,
            eta_star: cfg.eta,
            radius: report.rho,
        });
    }
    Ok(Fig2 { rows, circles })
}

pub fn fig2_files(f: &Fig2) -> Vec<OutputFile> {
    let mut eig = String::from("algo,eta,re,im,modulus\n");
    for r in &f.rows {
        let modulus = r.re.hypot(r.im);
        let _ = writeln!(
            eig,
            "{},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.algorithm, r.eta, r.re, r.im, modulus
        );
    }
    let mut circ = String::from("algo,eta_star,radius\n");
    for c in &f.circles {
        let _ = writeln!(
            circ,
            "{},{:.16e},{:.16e}",
            c.algorithm, c.eta_star, c.radius
        );
    }
    vec![
        OutputFile::new("eigenvalues.csv", eig),
        OutputFile::new("circles.csv", circ),
    ]
}

// ---------------------------------------------------------------- fig3 left

#[derive(Clone, Debug)]
pub struct Fig3LeftParams {
    pub dim: usize,
    pub seed: u64,
    pub coupling_std: f64,
    pub algorithms: Vec<Algorithm>,
    pub eta_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub max_iters: usize,
    pub stop: f64,
}

impl Default for Fig3LeftParams {
    fn default() -> Self {
        Self {
            dim: 100,
            seed: 0,
            coupling_std: 0.1,
            algorithms: fig3_algorithms(),
            eta_grid: default_eta_grid(),
            beta_grid: default_beta_grid(),
            max_iters: 100_000,
            stop: 1e-12,
        }
    }
}

pub struct Fig3LeftRun {
    pub config: AlgorithmConfig,
    pub rho: f64,
    pub trajectory: Trajectory,
    /// First iteration with Δ ≤ 1e-10.
    pub iters_to_target: Option<usize>,
    pub rho_hat: Option<f64>,
}

pub struct Fig3Left {
    pub game: QuadraticGame,
    /// Class-bound condition number `L/μ`.
    pub kappa: f64,
    pub runs: Vec<Fig3LeftRun>,
}

impl Fig3Left {
    pub fn get(&self, algorithm: Algorithm) -> Option<&Fig3LeftRun> {
        self.runs.iter().find(|r| r.config.algorithm == algorithm)
    }
}

/// Tunes each method on the instance and runs it from all ones.
pub fn fig3_left(p: &Fig3LeftParams) -> Result<Fig3Left> {
    let game = gen_scsc(p.dim, p.seed, p.coupling_std)?;
    let kappa = game
        .class_bounds()
        .kappa
        .context("instance has no finite condition number")?;
    let z0 = vec![1.0; game.dim()];
    let opts = RunOptions {
        max_iters: p.max_iters,
        stop: p.stop,
        ..Default::default()
    };
    let runs = p
        .algorithms
        .iter()
        .map(|&algorithm| {
            let betas = algorithm.uses_momentum().then_some(&p.beta_grid[..]);
            let (config, report) = tune(&game, algorithm, &p.eta_grid, betas)?;
            let trajectory = run(&game, config, &z0, &opts)?;
            let iters_to_target = trajectory
                .deltas
                .iter()
                .position(|&d| d <= FIG3_TARGET)
                .map(|i| trajectory.iters[i]);
            let rho_hat = estimate_rate(&trajectory, DEFAULT_TAIL_FRACTION)
                .ok()
                .map(|e| e.rho_hat);
            Ok(Fig3LeftRun {
                config,
                rho: report.rho,
                trajectory,
                iters_to_target,
                rho_hat,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Fig3Left { game, kappa, runs })
}

pub fn fig3_left_files(f: &Fig3Left) -> Vec<OutputFile> {
    let mut files: Vec<OutputFile> = f
        .runs
        .iter()
        .map(|r| OutputFile::new(format!("{}.csv", r.config.algorithm), r.trajectory.to_csv()))
        .collect();

    let horizon = f
        .runs
        .iter()
        .map(|r| r.trajectory.steps())
        .max()
        .unwrap_or(0);
    let delta0 = f.runs.first().map_or(0.0, |r| r.trajectory.deltas[0]);
    let base = 1.0 - 1.0 / f.kappa;
    let mut reference = format!("# kappa={:.16e}\niter,factor,delta\n", f.kappa);
    for t in 0..=horizon {
        let factor = base.powi(t as i32);
        let _ = writeln!(
            reference,
            "{t},{factor:.16e},{:.16e}",
            delta0 * factor * factor
        );
    }
    files.push(OutputFile::new("reference.csv", reference));

    let mut summary =
        String::from("algo,eta,beta,rho,iters_to_1e-10,rho_hat,steps,status,extension\n");
    for r in &f.runs {
        let _ = writeln!(
            summary,
            "{},{:.16e},{},{:.16e},{},{},{},{},{}",
            r.config.algorithm,
            r.config.eta,
            opt(r.config.beta),
            r.rho,
            r.iters_to_target
                .map_or_else(|| "none".to_string(), |t| t.to_string()),
            opt(r.rho_hat),
            r.trajectory.steps(),
            r.trajectory.status,
            r.config.algorithm == FIG3_EXTENSION,
        );
    }
    files.push(OutputFile::new("summary.csv", summary));
    files
}

// ---------------------------------------------------------------- fig3 right

pub const N_MIN: f64 = 3.1622776601683795;
pub const N_MAX: f64 = 1e3;

#[derive(Clone, Debug)]
pub struct Fig3RightParams {
    pub dim: usize,
    pub n_values: Vec<f64>,
    pub seed: u64,
    pub seeds: usize,
    pub algorithms: Vec<Algorithm>,
    pub eta_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
}

impl Default for Fig3RightParams {
    fn default() -> Self {
        Self {
            dim: 20,
            n_values: log_space(N_MIN, N_MAX, 12),
            seed: 0,
            seeds: 5,
            algorithms: fig3_algorithms(),
            eta_grid: default_eta_grid(),
            beta_grid: default_beta_grid(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRow {
    pub kappa: f64,
    pub algorithm: Algorithm,
    pub rho: f64,
    pub eta_star: f64,
    pub beta_star: Option<f64>,
    pub seed: u64,
    pub n_param: f64,
}

impl ScalingRow {
    /// Iterations per e-fold of contraction.
    pub fn inv_neg_log_rho(&self) -> f64 {
        -1.0 / self.rho.ln()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlopeFit {
    pub algorithm: Algorithm,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Points in the fit. Rows with ρ* ≥ 1 are left out.
    pub n: usize,
}

pub struct Fig3Right {
    pub rows: Vec<ScalingRow>,
    pub slopes: Vec<SlopeFit>,
}

impl Fig3Right {
    pub fn slope(&self, algorithm: Algorithm) -> Option<&SlopeFit> {
        self.slopes.iter().find(|s| s.algorithm == algorithm)
    }
}

/// Least squares `y = slope·x + intercept`, with r².
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - xm) * (x - xm);
        sxy += (x - xm) * (y - ym);
        syy += (y - ym) * (y - ym);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Some((slope, intercept, r2))
}

pub fn fig3_right(p: &Fig3RightParams) -> Result<Fig3Right> {
    for &n in &p.n_values {
        if !(N_MIN * (1.0 - 1e-12)..=N_MAX * (1.0 + 1e-12)).contains(&n) {
            bail!("N values must lie in [sqrt(10), 1000], got {n}");
        }
    }
    if p.seeds == 0 {
        bail!("--seeds must be at least 1");
    }
    let jobs: Vec<(f64, u64)> = p
        .n_values
        .iter()
        .flat_map(|&n| (0..p.seeds as u64).map(move |s| (n, p.seed + s)))
        .collect();
    let per_instance = jobs
        .par_iter()
        .map(|&(n_param, seed)| -> Result<Vec<ScalingRow>> {
            let g = gen_scaling_instance(p.dim, n_param, seed)?;
            let kappa = g.condition_number_empirical()?;
            p.algorithms
                .iter()
                .map(|&algorithm| {
                    let betas = algorithm.uses_momentum().then_some(&p.beta_grid[..]);
                    let (cfg, report) = tune(&g, algorithm, &p.eta_grid, betas)?;
                    Ok(ScalingRow {
                        kappa,
                        algorithm,
                        rho: report.rho,
                        eta_star: cfg.eta,
                        beta_star: cfg.beta,
                        seed,
                        n_param,
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<ScalingRow> = per_instance.into_iter().flatten().collect();

    let slopes = p
        .algorithms
        .iter()
        .filter_map(|&algorithm| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter(|r| r.algorithm == algorithm && r.rho < 1.0)
                .map(|r| (r.kappa.ln(), r.inv_neg_log_rho().ln()))
                .unzip();
            let (slope, intercept, r2) = linear_fit(&xs, &ys)?;
            Some(SlopeFit {
                algorithm,
                slope,
                intercept,
                r2,
                n: xs.len(),
            })
        })
        .collect();
    Ok(Fig3Right { rows, slopes })
}

pub fn fig3_right_files(f: &Fig3Right) -> Vec<OutputFile> {
    let mut scaling =
        String::from("kappa,algo,rho,inv_neg_log_rho,eta_star,beta_star,seed,n_param\n");
    for r in &f.rows {
        let _ = writeln!(
            scaling,
            "{:.16e},{},{:.16e},{:.16e},{:.16e},{},{},{:.16e}",
            r.kappa,
            r.algorithm,
            r.rho,
            r.inv_neg_log_rho(),
            r.eta_star,
            opt(r.beta_star),
            r.seed,
            r.n_param
        );
    }
    let mut slopes = String::from("algo,slope,intercept,r2,n\n");
    for s in &f.slopes {
        let _ = writeln!(
            slopes,
            "{},{:.16e},{:.16e},{:.16e},{}",
            s.algorithm, s.slope, s.intercept, s.r2, s.n
        );
    }
    vec![
        OutputFile::new("scaling.csv", scaling),
        OutputFile::new("slopes.csv", slopes),
    ]
}

/// Header lines naming the extension method when it is present.
pub fn extension_note(algorithms: &[Algorithm]) -> Vec<String> {
    if algorithms.contains(&FIG3_EXTENSION) {
        vec![format!(
            "extension: {FIG3_EXTENSION} is reported in addition to the five compared methods"
        )]
    } else {
        Vec::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_a_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let (s, i, r2) = linear_fit(&xs, &ys).unwrap();
        assert!((s - 2.0).abs() < 1e-14 && (i + 1.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
        assert!(linear_fit(&[1.0], &[1.0]).is_none());
        assert!(linear_fit(&[1.0, 1.0], &[1.0, 2.0]).is_none());
    }

    #[test]
    fn fig1_row_counts() {
        let runs = fig1().unwrap();
        assert_eq!(runs.len(), 6);
        for r in &runs {
            let steps = if r.name.starts_with("sim") { 100 } else { 20 };
            assert_eq!(r.trajectory.len(), steps + 1, "{}", r.name);
        }
    }

    #[test]
    fn n_range_is_enforced() {
        let p = Fig3RightParams {
            n_values: vec![2.0],
            ..Default::default()
        };
        assert!(fig3_right(&p).is_err());
    }
}
