//! Iterate trajectories, distance to equilibrium and empirical rates.
//!
//! `Δt = ‖x_t − x*‖² + ‖y_t − y*‖²`. For augmented layouts only the
//! current half `z_t` of the state enters `Δt`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::games::{Provenance, QuadraticGame};
use crate::operators::{half_step_alt, Algorithm, AlgorithmConfig, UpdateOperator};

pub const DEFAULT_STOP: f64 = 1e-12;
pub const DEFAULT_CEILING: f64 = 1e12;
pub const DEFAULT_MAX_ITERS: usize = 1_000_000;
pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;
/// Leading share of a trajectory never used for rate fits.
pub const BURN_IN_FRACTION: f64 = 0.1;
pub const MIN_FIT_POINTS: usize = 10;
/// States are kept by default up to this `d + p`.
pub const AUTO_STATE_DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Converged(usize),
    MaxIters,
    Diverged(usize),
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Status::Converged(t) => write!(f, "converged({t})"),
            Status::MaxIters => f.write_str("max_iters"),
            Status::Diverged(t) => write!(f, "diverged({t})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub max_iters: usize,
    pub stop: f64,
    pub ceiling: f64,
    /// `None` keeps states when `d + p ≤ 4`.
    pub record_states: Option<bool>,
    /// Alt-GDA only: iterate with the two half updates instead of the
    /// operator matrix.
    pub use_half_steps: bool,
    /// Record every `record_stride`-th step. The last step is always kept.
    pub record_stride: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            max_iters: DEFAULT_MAX_ITERS,
            stop: DEFAULT_STOP,
            ceiling: DEFAULT_CEILING,
            record_states: None,
            use_half_steps: false,
            record_stride: 1,
        }
    }
}

impl RunOptions {
    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub config: AlgorithmConfig,
    pub game_ref: Provenance,
    /// Stacked initial state in the operator layout.
    pub init: Vec<f64>,
    /// Iteration index of each recorded entry.
    pub iters: Vec<usize>,
    pub deltas: Vec<f64>,
    /// `(x, y)` at each recorded iteration.
    pub states: Option<Vec<Vec<f64>>>,
    pub status: Status,
    pub d: usize,
    pub p: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    pub fn final_delta(&self) -> f64 {
        *self
            .deltas
            .last()
            .expect("trajectory records its initial point")
    }

    /// Number of iterations performed.
    pub fn steps(&self) -> usize {
        *self
            .iters
            .last()
            .expect("trajectory records its initial point")
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let beta = self
            .config
            .beta
            .map_or("none".to_string(), |b| format!("{b:.16e}"));
        let _ = writeln!(
            s,
            "# algorithm={} eta={:.16e} beta={beta}",
            self.config.algorithm, self.config.eta
        );
        let _ = writeln!(s, "# game={}", self.game_ref);
        let _ = writeln!(s, "# status={}", self.status);
        s.push_str("iter,delta");
        if self.states.is_some() {
            if self.d == 1 && self.p == 1 {
                s.push_str(",x,y");
            } else {
                (1..=self.d).for_each(|i| {
                    let _ = write!(s, ",x{i}");
                });
                (1..=self.p).for_each(|i| {
                    let _ = write!(s, ",y{i}");
                });
            }
        }
        s.push('\n');
        for (k, (t, delta)) in self.iters.iter().zip(&self.deltas).enumerate() {
            let _ = write!(s, "{t},{delta:.16e}");
            if let Some(states) = &self.states {
                for v in &states[k] {
                    let _ = write!(s, ",{v:.16e}");
                }
            }
            s.push('\n');
        }
        s
    }
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

pub fn run(
    g: &QuadraticGame,
    config: AlgorithmConfig,
    z0: &[f64],
    opts: &RunOptions,
) -> Result<Trajectory> {
    if opts.stop.is_nan() || opts.ceiling.is_nan() || opts.stop >= opts.ceiling {
        return Err(Error::Parameter(format!(
            "stop threshold {} must be below the divergence ceiling {}",
            opts.stop, opts.ceiling
        )));
    }
    if opts.record_stride == 0 {
        return Err(Error::Parameter("record stride must be at least 1".into()));
    }
    if opts.use_half_steps && config.algorithm != Algorithm::AltGda {
        return Err(Error::Parameter(format!(
            "half steps apply to alt_gda, not {}",
            config.algorithm
        )));
    }
    let op = UpdateOperator::build(g, config)?;
    let init = op.initial_state(z0)?;
    if let Some(bad) = init.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("initial state entry {bad}")));
    }
    let (d, p) = (g.d(), g.p());
    let n = d + p;
    let keep_states = opts.record_states.unwrap_or(n <= AUTO_STATE_DIM);

    let mut traj = Trajectory {
        config,
        game_ref: g.provenance().clone(),
        init: init.clone(),
        iters: Vec::new(),
        deltas: Vec::new(),
        states: keep_states.then(Vec::new),
        status: Status::MaxIters,
        d,
        p,
    };
    let record = |traj: &mut Trajectory, t: usize, state: &[f64], delta: f64| {
        traj.iters.push(t);
        traj.deltas.push(delta);
        if let Some(states) = traj.states.as_mut() {
            states.push(state[..n].to_vec());
        }
    };

    let mut state = init;
    let mut next = vec![0.0; state.len()];
    let mut delta = sq_norm(&state[..n]);
    let mut t = 0;
    loop {
        let status = if delta <= opts.stop {
            Some(Status::Converged(t))
        } else if delta > opts.ceiling {
            Some(Status::Diverged(t))
        } else if t >= opts.max_iters {
            Some(Status::MaxIters)
        } else {
            None
        };
        if let Some(status) = status {
            record(&mut traj, t, &state, delta);
            traj.status = status;
            return Ok(traj);
        }
        if t % opts.record_stride == 0 {
            record(&mut traj, t, &state, delta);
        }

        if opts.use_half_steps {
            let (x, y) = half_step_alt(g, config.eta, &state[..d], &state[d..n])?;
            next[..d].copy_from_slice(&x);
            next[d..n].copy_from_slice(&y);
        } else {
            op.matrix.matvec_into(&state, &mut next);
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::TrajectoryNonFinite {
                iter: t + 1,
                last_good: state[..n].to_vec(),
            });
        }
        std::mem::swap(&mut state, &mut next);
        delta = sq_norm(&state[..n]);
        t += 1;
    }
}

/// Raw `(x, y)` iterates of a 1×1 game, `iters + 1` points including the
/// start. Never stops early.
pub fn trajectory_2d(
    g: &QuadraticGame,
    config: AlgorithmConfig,
    init: (f64, f64),
    iters: usize,
) -> Result<Vec<(f64, f64)>> {
    if g.d() != 1 || g.p() != 1 {
        return Err(Error::Dimension(format!(
            "trajectory_2d needs d = p = 1, got d={}, p={}",
            g.d(),
            g.p()
        )));
    }
    let opts = RunOptions {
        max_iters: iters,
        stop: f64::NEG_INFINITY,
        ceiling: f64::INFINITY,
        record_states: Some(true),
        use_half_steps: false,
        record_stride: 1,
    };
    let traj = run(g, config, &[init.0, init.1], &opts)?;
    Ok(traj
        .states
        .expect("states requested")
        .into_iter()
        .map(|s| (s[0], s[1]))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateEstimate {
    pub rho_hat: f64,
    /// Half-open iteration range `[t0, t1)` used by the fit.
    pub window: (usize, usize),
    pub r2: f64,
}

/// Least-squares fit of `log Δt` over the last `tail_fraction` of the
/// recorded points (never the first 10%). Δ is a squared distance, so the
/// per-step contraction is `exp(slope / 2)`.
pub fn estimate_rate(traj: &Trajectory, tail_fraction: f64) -> Result<RateEstimate> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::RateEstimation(format!(
            "tail fraction must lie in (0, 1], got {tail_fraction}"
        )));
    }
    let n = traj.deltas.len();
    let burn = (BURN_IN_FRACTION * n as f64).ceil() as usize;
    let tail = ((1.0 - tail_fraction) * n as f64).floor() as usize;
    let start = burn.max(tail);
    if n < start + MIN_FIT_POINTS {
        return Err(Error::RateEstimation(format!(
            "{} points in the fit window, need at least {MIN_FIT_POINTS}",
            n.saturating_sub(start)
        )));
    }
    let window = &traj.deltas[start..];
    if window.iter().any(|&v| v <= 0.0) {
        return Err(Error::RateEstimation(
            "zero distance inside the fit window".into(),
        ));
    }
    let ts: Vec<f64> = traj.iters[start..].iter().map(|&t| t as f64).collect();
    let ys: Vec<f64> = window.iter().map(|v| v.ln()).collect();
    let m = ts.len() as f64;
    let t_mean = ts.iter().sum::<f64>() / m;
    let y_mean = ys.iter().sum::<f64>() / m;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for (t, y) in ts.iter().zip(&ys) {
        let (dt, dy) = (t - t_mean, y - y_mean);
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    let slope = sty / stt;
    let ss_res: f64 = ts
        .iter()
        .zip(&ys)
        .map(|(t, y)| (y - y_mean - slope * (t - t_mean)).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(RateEstimate {
        rho_hat: (slope / 2.0).exp(),
        window: (traj.iters[start], traj.iters[n - 1] + 1),
        r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn synthetic(deltas: Vec<f64>) -> Trajectory {
        Trajectory {
            config: AlgorithmConfig::sim(0.1).unwrap(),
            game_ref: Provenance::inline(),
            init: vec![1.0, 1.0],
            iters: (0..deltas.len()).collect(),
            deltas,
            states: None,
            status: Status::MaxIters,
            d: 1,
            p: 1,
        }
    }

    #[test]
    fn alt_first_step() {
        let g = QuadraticGame::scalar(1.0, 10.0, 1.0).unwrap();
        let traj = run(
            &g,
            AlgorithmConfig::alt(0.05).unwrap(),
            &[1.0, 1.0],
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(traj.deltas[0], 2.0);
        assert!(close(traj.deltas[1], 1.583125, 1e-14));
        let s = traj.states.as_ref().unwrap();
        assert!(close(s[1][0], 0.45, 1e-15) && close(s[1][1], 1.175, 1e-15));
        assert!(matches!(traj.status, Status::Converged(_)));
        assert!(traj.final_delta() <= DEFAULT_STOP);

        let est = estimate_rate(&traj, 0.5).unwrap();
        assert!(close(est.rho_hat, 0.95, 1e-3), "{est:?}");
    }

    #[test]
    fn half_steps_match_operator() {
        let g = QuadraticGame::scalar(1.0, 10.0, 1.0).unwrap();
        let cfg = AlgorithmConfig::alt(0.05).unwrap();
        let a = run(&g, cfg, &[1.0, 1.0], &RunOptions::default()).unwrap();
        let opts = RunOptions {
            use_half_steps: true,
            ..Default::default()
        };
        let b = run(&g, cfg, &[1.0, 1.0], &opts).unwrap();
        assert_eq!(a.status, b.status);
        for (x, y) in a.deltas.iter().zip(&b.deltas) {
            assert!((x - y).abs() <= 1e-12 * x.max(1e-300));
        }
        assert!(run(&g, AlgorithmConfig::sim(0.05).unwrap(), &[1.0, 1.0], &opts).is_err());
    }

    #[test]
    fn sim_bilinear_diverges() {
        let g = QuadraticGame::scalar(0.0, 10.0, 0.0).unwrap();
        let traj = run(
            &g,
            AlgorithmConfig::sim(0.01).unwrap(),
            &[1.0, 1.0],
            &RunOptions::default(),
        )
        .unwrap();
        assert!(matches!(traj.status, Status::Diverged(_)));
        assert!(traj.final_delta() > DEFAULT_CEILING);
        for w in traj.deltas.windows(2) {
            assert!(close(w[1] / w[0], 1.01, 1e-12));
        }
        let est = estimate_rate(&traj, 0.5).unwrap();
        assert!(close(est.rho_hat, 1.01f64.sqrt(), 1e-9));
    }

    #[test]
    fn equilibrium_start() {
        let g = QuadraticGame::scalar(1.0, 10.0, 1.0).unwrap();
        for algo in Algorithm::ALL {
            let beta = algo.uses_momentum().then_some(-0.3);
            let cfg = AlgorithmConfig::new(algo, 0.05, beta).unwrap();
            let traj = run(&g, cfg, &[0.0, 0.0], &RunOptions::default()).unwrap();
            assert_eq!(traj.status, Status::Converged(0));
            assert_eq!(traj.deltas, vec![0.0]);
        }
    }

    #[test]
    fn stride_and_options() {
        let g = QuadraticGame::scalar(1.0, 10.0, 1.0).unwrap();
        let cfg = AlgorithmConfig::alt(0.05).unwrap();
        let full = run(&g, cfg, &[1.0, 1.0], &RunOptions::default()).unwrap();
        let opts = RunOptions {
            record_stride: 7,
            ..Default::default()
        };
        let strided = run(&g, cfg, &[1.0, 1.0], &opts).unwrap();
        assert_eq!(strided.status, full.status);
        assert_eq!(strided.steps(), full.steps());
        for (t, delta) in strided.iters.iter().zip(&strided.deltas) {
            assert_eq!(*delta, full.deltas[*t]);
        }
        let capped = run(
            &g,
            cfg,
            &[1.0, 1.0],
            &RunOptions::default().with_max_iters(5),
        )
        .unwrap();
        assert_eq!(capped.status, Status::MaxIters);
        assert_eq!(capped.len(), 6);
        let bad = RunOptions {
            stop: 1.0,
            ceiling: 1.0,
            ..Default::default()
        };
        assert!(run(&g, cfg, &[1.0, 1.0], &bad).is_err());
        assert!(run(&g, cfg, &[1.0], &RunOptions::default()).is_err());
    }

    #[test]
    fn augmented_delta_uses_current_iterate() {
        let g = QuadraticGame::scalar(1.0, 10.0, 1.0).unwrap();
        let traj = run(
            &g,
            AlgorithmConfig::nm(0.05, -0.2).unwrap(),
            &[1.0, 1.0],
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(traj.init, vec![1.0, 1.0, 1.0, 1.0]);
        assert_eq!(traj.deltas[0], 2.0);
        assert_eq!(traj.states.as_ref().unwrap()[0].len(), 2);
    }

    #[test]
    fn rate_examples() {
        let deltas: Vec<f64> = (0..200).map(|t| 2.0 * 0.9025f64.powi(t)).collect();
        let est = estimate_rate(&synthetic(deltas), 0.5).unwrap();
        assert!(close(est.rho_hat, 0.95, 1e-9));
        assert!(close(est.r2, 1.0, 1e-12));
        assert_eq!(est.window, (100, 200));

        let est = estimate_rate(&synthetic(vec![1.0; 100]), 1.0).unwrap();
        assert_eq!(est.window.0, 10);
        assert!(close(est.rho_hat, 1.0, 1e-15));

        assert!(estimate_rate(&synthetic(vec![1.0; 15]), 0.5).is_err());
        let mut zeros = vec![1.0; 40];
        zeros[35] = 0.0;
        assert!(estimate_rate(&synthetic(zeros), 0.5).is_err());
        assert!(estimate_rate(&synthetic(vec![1.0; 40]), 0.0).is_err());
    }

    #[test]
    fn figure_one_panels() {
        let scsc = QuadraticGame::scalar(1.0, 10.0, 1.0).unwrap();
        let pts =
            trajectory_2d(&scsc, AlgorithmConfig::sim(0.01).unwrap(), (1.0, 1.0), 100).unwrap();
        assert_eq!(pts.len(), 101);
        let delta = |p: (f64, f64)| p.0 * p.0 + p.1 * p.1;
        assert!(delta(pts[100]) < delta(pts[0]));

        let bil = QuadraticGame::scalar(0.0, 10.0, 0.0).unwrap();
        let pts = trajectory_2d(&bil, AlgorithmConfig::alt(0.08).unwrap(), (1.0, 1.0), 20).unwrap();
        let ratio = delta(pts[20]) / delta(pts[0]);
        assert!((0.5..=2.0).contains(&ratio), "{ratio}");

        let nosc = QuadraticGame::scalar(0.0, 10.0, 2.0).unwrap();
        let alt =
            trajectory_2d(&nosc, AlgorithmConfig::alt(0.05).unwrap(), (1.0, 1.0), 20).unwrap();
        let sim =
            trajectory_2d(&nosc, AlgorithmConfig::sim(0.01).unwrap(), (1.0, 1.0), 100).unwrap();
        assert!(delta(alt[20]) < delta(sim[100]));
        assert!(delta(sim[100]) < delta(sim[0]));

        let big = crate::games::gen_bilinear(2, 1, 0).unwrap();
        assert!(trajectory_2d(&big, AlgorithmConfig::alt(0.08).unwrap(), (1.0, 1.0), 5).is_err());
    }

    #[test]
    fn csv_export() {
        let g = QuadraticGame::scalar(1.0, 10.0, 1.0).unwrap();
        let traj = run(
            &g,
            AlgorithmConfig::alt(0.05).unwrap(),
            &[1.0, 1.0],
            &RunOptions::default().with_max_iters(3),
        )
        .unwrap();
        let csv = traj.to_csv();
        let lines: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines[0], "iter,delta,x,y");
        assert_eq!(lines.len(), 5);
        let row: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(row[0], 1.0);
        assert!(close(row[1], 1.583125, 1e-15));
        assert!(lines[2].split(',').nth(1).unwrap().contains('e'));
        assert!(csv.starts_with("# algorithm=alt_gda"));
    }
}
