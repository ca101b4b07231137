//! Spectral reports, grid-search step-size tuning, and executable checks of
//! the eigenvalue bounds for Sim-GDA and Alt-GDA in each game regime.
//!
//! Every checker compares each eigenvalue of the update operator with the
//! bound for its class (real or complex, as decided by
//! [`linalg::is_real`]) at absolute tolerance [`BOUND_TOL`]. The
//! Sim-GDA checks for the bilinear and strongly-convex strongly-concave
//! cases are stated on squared moduli, since `|1 − ηλ|²` is what the
//! closed forms describe.

use std::cmp::Ordering;
use std::fmt::{self, Write as _};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::games::{GameClassBounds, GameRegime, QuadraticGame};
use crate::linalg::{self, is_real, Spectrum};
use crate::operators::{Algorithm, AlgorithmConfig, UpdateOperator};

/// Tolerance on modulus comparisons.
pub const BOUND_TOL: f64 = 1e-8;
/// Tolerance for the bilinear Alt-GDA boundedness check `ρ ≤ 1`.
pub const BILINEAR_ALT_TOL: f64 = 1e-10;
/// Slack allowed when comparing `eta` with a ceiling or prescribed step.
const ETA_REL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralReport {
    pub spectrum: Spectrum,
    pub rho: f64,
    pub real_eigs: Vec<Complex64>,
    pub complex_eigs: Vec<Complex64>,
    pub config: AlgorithmConfig,
    pub bounds: Option<TheoremBounds>,
}

impl SpectralReport {
    /// Record per eigenvalue, then a summary line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        match &self.bounds {
            Some(tb) => {
                for e in &tb.entries {
                    let _ = writeln!(
                        s,
                        "eigenvalue re={:.16e} im={:.16e} modulus={:.16e} class={} bound={:.16e} slack={:.16e}",
                        e.eigenvalue.re,
                        e.eigenvalue.im,
                        e.eigenvalue.norm(),
                        e.class,
                        e.bound,
                        e.slack
                    );
                }
                let _ = writeln!(
                    s,
                    "summary rho={:.16e} theorem={} eta={:.16e} slack={:.16e} result={}",
                    self.rho,
                    tb.theorem_id,
                    tb.eta,
                    tb.slack,
                    if tb.passed() { "pass" } else { "fail" }
                );
            }
            None => {
                for z in self.spectrum.values() {
                    let class = if is_real(*z) {
                        EigenClass::Real
                    } else {
                        EigenClass::Complex
                    };
                    let _ = writeln!(
                        s,
                        "eigenvalue re={:.16e} im={:.16e} modulus={:.16e} class={class} bound=none slack=none",
                        z.re,
                        z.im,
                        z.norm()
                    );
                }
                let _ = writeln!(
                    s,
                    "summary rho={:.16e} config={} theorem=none",
                    self.rho, self.config
                );
            }
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TheoremId {
    BilinearSim,
    BilinearAlt,
    SimScsc,
    AltScsc,
    SimNoSc,
    AltNoSc,
}

impl TheoremId {
    pub fn name(self) -> &'static str {
        match self {
            TheoremId::BilinearSim => "bilinear_sim",
            TheoremId::BilinearAlt => "bilinear_alt",
            TheoremId::SimScsc => "sim_scsc",
            TheoremId::AltScsc => "alt_scsc",
            TheoremId::SimNoSc => "sim_nosc",
            TheoremId::AltNoSc => "alt_nosc",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let all = [
            TheoremId::BilinearSim,
            TheoremId::BilinearAlt,
            TheoremId::SimScsc,
            TheoremId::AltScsc,
            TheoremId::SimNoSc,
            TheoremId::AltNoSc,
        ];
        let norm = s.to_ascii_lowercase().replace('-', "_");
        all.into_iter()
            .find(|t| t.name() == norm)
            .ok_or_else(|| Error::Parameter(format!("unknown theorem {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenClass {
    Real,
    Complex,
}

impl fmt::Display for EigenClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EigenClass::Real => "real",
            EigenClass::Complex => "complex",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    /// `measured ≤ bound`
    Upper,
    /// `measured == bound` within tolerance
    Equal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundEntry {
    pub eigenvalue: Complex64,
    pub class: EigenClass,
    /// Modulus, or squared modulus when the theorem is stated on `|λ|²`.
    pub measured: f64,
    pub bound: f64,
    pub kind: BoundKind,
    /// `bound − measured` for upper bounds, `−|bound − measured|` for
    /// equalities. Negative beyond the tolerance is a violation.
    pub slack: f64,
}

/// Rate at the step size a corollary prescribes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateCheck {
    pub eta: f64,
    pub rate_bound: f64,
    /// `ρ`, or `ρ²` when the theorem is stated on squared moduli.
    pub measured: f64,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoremBounds {
    pub theorem_id: TheoremId,
    pub eta: f64,
    pub real_bound: f64,
    pub complex_bound: f64,
    pub eta_max: f64,
    /// Whether bounds and measurements are squared moduli.
    pub squared: bool,
    pub tolerance: f64,
    /// Minimum slack over all entries.
    pub slack: f64,
    pub entries: Vec<BoundEntry>,
    pub rate: Option<RateCheck>,
}

impl TheoremBounds {
    pub fn violations(&self) -> Vec<&BoundEntry> {
        self.entries
            .iter()
            .filter(|e| e.slack < -self.tolerance)
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.violations().is_empty() && self.rate.is_none_or(|r| r.slack >= -self.tolerance)
    }
}

pub fn analyze(g: &QuadraticGame, config: AlgorithmConfig) -> Result<SpectralReport> {
    let op = UpdateOperator::build(g, config)?;
    let spectrum = linalg::eigenvalues(&op.matrix)?;
    Ok(report_from_spectrum(spectrum, config))
}

fn report_from_spectrum(spectrum: Spectrum, config: AlgorithmConfig) -> SpectralReport {
    let (real_eigs, complex_eigs) = spectrum.values().iter().partition(|z| is_real(**z));
    SpectralReport {
        rho: spectrum.radius(),
        spectrum,
        real_eigs,
        complex_eigs,
        config,
        bounds: None,
    }
}

fn classify(z: Complex64) -> EigenClass {
    if is_real(z) {
        EigenClass::Real
    } else {
        EigenClass::Complex
    }
}

fn require_regime(
    g: &QuadraticGame,
    check: &'static str,
    required: GameRegime,
) -> Result<GameClassBounds> {
    let regime = g.regime();
    if regime != required {
        return Err(Error::Regime {
            check,
            required: match required {
                GameRegime::Bilinear => "bilinear",
                GameRegime::Scsc => "strongly-convex strongly-concave",
                GameRegime::StrongConcaveOnly => "strongly-concave-only",
                GameRegime::General => "general",
            },
            actual: regime.to_string(),
        });
    }
    Ok(g.class_bounds())
}

fn require_eta(check: &'static str, eta: f64, eta_max: f64) -> Result<()> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::Parameter(format!(
            "step size must be finite and positive, got {eta}"
        )));
    }
    if eta > eta_max * (1.0 + ETA_REL_TOL) {
        return Err(Error::EtaAboveCeiling {
            check,
            eta,
            eta_max,
        });
    }
    Ok(())
}

fn at_prescribed_step(eta: f64, prescribed: f64) -> bool {
    (eta - prescribed).abs() <= ETA_REL_TOL * prescribed
}

fn upper_entries(
    spectrum: &Spectrum,
    real_bound: f64,
    complex_bound: f64,
    squared: bool,
) -> Vec<BoundEntry> {
    spectrum
        .values()
        .iter()
        .map(|&z| {
            let class = classify(z);
            let measured = if squared { z.norm_sqr() } else { z.norm() };
            let bound = match class {
                EigenClass::Real => real_bound,
                EigenClass::Complex => complex_bound,
            };
            BoundEntry {
                eigenvalue: z,
                class,
                measured,
                bound,
                kind: BoundKind::Upper,
                slack: bound - measured,
            }
        })
        .collect()
}

fn min_slack(entries: &[BoundEntry]) -> f64 {
    entries
        .iter()
        .map(|e| e.slack)
        .fold(f64::INFINITY, f64::min)
}

fn assemble(
    theorem_id: TheoremId,
    eta: f64,
    eta_max: f64,
    real_bound: f64,
    complex_bound: f64,
    squared: bool,
    tolerance: f64,
    entries: Vec<BoundEntry>,
    rate: Option<RateCheck>,
) -> TheoremBounds {
    TheoremBounds {
        theorem_id,
        eta,
        real_bound,
        complex_bound,
        eta_max,
        squared,
        tolerance,
        slack: min_slack(&entries),
        entries,
        rate,
    }
}

/// Roots of `(x − 1)² + η²λx`, the Alt-GDA eigenvalues contributed by an
/// eigenvalue `λ` of `BᵀB` in a bilinear game.
pub fn alt_bilinear_roots(lambda: f64, eta: f64) -> [Complex64; 2] {
    // x² − (2 − η²λ)x + 1
    let half_trace = Complex64::new(1.0 - 0.5 * eta * eta * lambda, 0.0);
    let disc = (half_trace * half_trace - 1.0).sqrt();
    [half_trace + disc, half_trace - disc]
}

/// Bilinear games. Sim-GDA: every eigenvalue has squared modulus
/// `1 + η²λ` for some `λ ∈ Sp(BᵀB)` (zero included when `d ≠ p`).
/// Alt-GDA: `ρ ≤ 1` whenever `η ≤ 1/σmax(B)`.
pub fn check_bilinear(g: &QuadraticGame, eta: f64, algorithm: Algorithm) -> Result<TheoremBounds> {
    let _ = require_regime(g, "bilinear bound", GameRegime::Bilinear)?;
    let sv = linalg::singular_values(g.b());
    let smax = sv[0];
    match algorithm {
        Algorithm::SimGda => {
            require_eta("bilinear_sim", eta, f64::INFINITY)?;
            let mut candidates: Vec<f64> = sv.iter().map(|s| 1.0 + eta * eta * s * s).collect();
            if g.d() != g.p() {
                candidates.push(1.0);
            }
            let report = analyze(g, AlgorithmConfig::sim(eta)?)?;
            let entries = report
                .spectrum
                .values()
                .iter()
                .map(|&z| {
                    let measured = z.norm_sqr();
                    let bound = candidates
                        .iter()
                        .copied()
                        .min_by(|a, b| (a - measured).abs().total_cmp(&(b - measured).abs()))
                        .expect("non-empty");
                    BoundEntry {
                        eigenvalue: z,
                        class: classify(z),
                        measured,
                        bound,
                        kind: BoundKind::Equal,
                        slack: -(bound - measured).abs(),
                    }
                })
                .collect();
            let top = 1.0 + eta * eta * smax * smax;
            Ok(assemble(
                TheoremId::BilinearSim,
                eta,
                f64::INFINITY,
                top,
                top,
                true,
                BOUND_TOL,
                entries,
                None,
            ))
        }
        Algorithm::AltGda => {
            let eta_max = if smax > 0.0 {
                1.0 / smax
            } else {
                f64::INFINITY
            };
            require_eta("bilinear_alt", eta, eta_max)?;
            let report = analyze(g, AlgorithmConfig::alt(eta)?)?;
            let entries = upper_entries(&report.spectrum, 1.0, 1.0, false);
            Ok(assemble(
                TheoremId::BilinearAlt,
                eta,
                eta_max,
                1.0,
                1.0,
                false,
                BILINEAR_ALT_TOL,
                entries,
                None,
            ))
        }
        other => Err(Error::Parameter(format!(
            "bilinear checks cover sim_gda and alt_gda, not {other}"
        ))),
    }
}

/// Sim-GDA on strongly-convex strongly-concave games:
/// `|λ|² ≤ 1 − 2ημ + 2η²L²` for every eigenvalue, any `η > 0`. At
/// `η = μ/(2L²)` this reads `ρ² ≤ 1 − 1/(2κ²)`.
pub fn check_sim_scsc(g: &QuadraticGame, eta: f64) -> Result<TheoremBounds> {
    let cb = require_regime(g, "sim_scsc", GameRegime::Scsc)?;
    require_eta("sim_scsc", eta, f64::INFINITY)?;
    let (mu, l) = (cb.mu, cb.l);
    let bound_sq = 1.0 - 2.0 * eta * mu + 2.0 * eta * eta * l * l;
    let report = analyze(g, AlgorithmConfig::sim(eta)?)?;
    let entries = upper_entries(&report.spectrum, bound_sq, bound_sq, true);
    let prescribed = mu / (2.0 * l * l);
    let rate = at_prescribed_step(eta, prescribed).then(|| {
        let kappa = l / mu;
        let rate_bound = 1.0 - 1.0 / (2.0 * kappa * kappa);
        let measured = report.rho * report.rho;
        RateCheck {
            eta: prescribed,
            rate_bound,
            measured,
            slack: rate_bound - measured,
        }
    });
    Ok(assemble(
        TheoremId::SimScsc,
        eta,
        f64::INFINITY,
        bound_sq,
        bound_sq,
        true,
        BOUND_TOL,
        entries,
        rate,
    ))
}

/// Alt-GDA on strongly-convex strongly-concave games with `η ≤ 1/(2L)`:
/// real eigenvalues `|λ| ≤ max{1 − ημx, 1 − ημy}`, complex ones
/// `|λ| ≤ √((1 − ημx)(1 − ημy))`. At `η = 1/(2L)` also `ρ ≤ 1 − 1/(2κ)`.
pub fn check_alt_scsc(g: &QuadraticGame, eta: f64) -> Result<TheoremBounds> {
    let cb = require_regime(g, "alt_scsc", GameRegime::Scsc)?;
    let eta_max = 1.0 / (2.0 * cb.l);
    require_eta("alt_scsc", eta, eta_max)?;
    let (qx, qy) = (1.0 - eta * cb.mu_x, 1.0 - eta * cb.mu_y);
    let real_bound = qx.max(qy);
    let complex_bound = (qx * qy).sqrt();
    let report = analyze(g, AlgorithmConfig::alt(eta)?)?;
    let entries = upper_entries(&report.spectrum, real_bound, complex_bound, false);
    let rate = at_prescribed_step(eta, eta_max).then(|| {
        let rate_bound = 1.0 - cb.mu / (2.0 * cb.l);
        RateCheck {
            eta: eta_max,
            rate_bound,
            measured: report.rho,
            slack: rate_bound - report.rho,
        }
    });
    Ok(assemble(
        TheoremId::AltScsc,
        eta,
        eta_max,
        real_bound,
        complex_bound,
        false,
        BOUND_TOL,
        entries,
        rate,
    ))
}

/// Sim-GDA without strong convexity in `x`, `η ≤ 1/L`: real eigenvalues
/// `|λ| ≤ max{1 − (η/L)μxy², 1 − ημy}`, complex ones
/// `|λ| ≤ √(1 − ημy + 2η²L²)`. At `η = μy/(4L²)` also
/// `ρ ≤ 1 − 1/(16·max{κy·κxy², κy²})`.
pub fn check_sim_nosc(g: &QuadraticGame, eta: f64) -> Result<TheoremBounds> {
    let cb = require_regime(g, "sim_nosc", GameRegime::StrongConcaveOnly)?;
    let l = cb.l;
    let eta_max = 1.0 / l;
    require_eta("sim_nosc", eta, eta_max)?;
    let real_bound = (1.0 - eta / l * cb.mu_xy * cb.mu_xy).max(1.0 - eta * cb.mu_y);
    let complex_bound = (1.0 - eta * cb.mu_y + 2.0 * eta * eta * l * l).sqrt();
    let report = analyze(g, AlgorithmConfig::sim(eta)?)?;
    let entries = upper_entries(&report.spectrum, real_bound, complex_bound, false);
    let prescribed = cb.mu_y / (4.0 * l * l);
    let rate = at_prescribed_step(eta, prescribed).then(|| {
        let (ky, kxy) = (l / cb.mu_y, l / cb.mu_xy);
        let rate_bound = 1.0 - 1.0 / (16.0 * (ky * kxy * kxy).max(ky * ky));
        RateCheck {
            eta: prescribed,
            rate_bound,
            measured: report.rho,
            slack: rate_bound - report.rho,
        }
    });
    Ok(assemble(
        TheoremId::SimNoSc,
        eta,
        eta_max,
        real_bound,
        complex_bound,
        false,
        BOUND_TOL,
        entries,
        rate,
    ))
}

/// Alt-GDA without strong convexity in `x`, `η ≤ 1/(2L)`: real eigenvalues
/// `|λ| ≤ max{1 − η²μxy², 1 − ημy}`, complex ones `|λ| ≤ √(1 − ημy)`. At
/// `η = 1/(2L)` also `ρ ≤ 1 − 1/(4·max{κxy², κy})`.
pub fn check_alt_nosc(g: &QuadraticGame, eta: f64) -> Result<TheoremBounds> {
    let cb = require_regime(g, "alt_nosc", GameRegime::StrongConcaveOnly)?;
    let l = cb.l;
    let eta_max = 1.0 / (2.0 * l);
    require_eta("alt_nosc", eta, eta_max)?;
    let real_bound = (1.0 - eta * eta * cb.mu_xy * cb.mu_xy).max(1.0 - eta * cb.mu_y);
    let complex_bound = (1.0 - eta * cb.mu_y).sqrt();
    let report = analyze(g, AlgorithmConfig::alt(eta)?)?;
    let entries = upper_entries(&report.spectrum, real_bound, complex_bound, false);
    let rate = at_prescribed_step(eta, eta_max).then(|| {
        let (ky, kxy) = (l / cb.mu_y, l / cb.mu_xy);
        let rate_bound = 1.0 - 1.0 / (4.0 * (kxy * kxy).max(ky));
        RateCheck {
            eta: eta_max,
            rate_bound,
            measured: report.rho,
            slack: rate_bound - report.rho,
        }
    });
    Ok(assemble(
        TheoremId::AltNoSc,
        eta,
        eta_max,
        real_bound,
        complex_bound,
        false,
        BOUND_TOL,
        entries,
        rate,
    ))
}

/// Step size at which the theorem's rate corollary applies: the ceiling
/// `1/(2L)` for the Alt-GDA checks and `1/σmax(B)` for the bilinear one,
/// `μ/(2L²)` and `μy/(4L²)` for the Sim-GDA checks. `None` for the
/// bilinear Sim-GDA statement, which holds for every step.
pub fn prescribed_step(g: &QuadraticGame, theorem: TheoremId) -> Option<f64> {
    let cb = g.class_bounds();
    let step = match theorem {
        TheoremId::BilinearSim => return None,
        TheoremId::BilinearAlt => 1.0 / cb.l_xy,
        TheoremId::SimScsc => cb.mu / (2.0 * cb.l * cb.l),
        TheoremId::AltScsc | TheoremId::AltNoSc => 1.0 / (2.0 * cb.l),
        TheoremId::SimNoSc => cb.mu_y / (4.0 * cb.l * cb.l),
    };
    (step.is_finite() && step > 0.0).then_some(step)
}

/// Runs the checker named by `theorem` and attaches it to a spectral
/// report of the operator it examined.
pub fn check(g: &QuadraticGame, theorem: TheoremId, eta: f64) -> Result<SpectralReport> {
    let (bounds, config) = match theorem {
        TheoremId::BilinearSim => (
            check_bilinear(g, eta, Algorithm::SimGda)?,
            AlgorithmConfig::sim(eta)?,
        ),
        TheoremId::BilinearAlt => (
            check_bilinear(g, eta, Algorithm::AltGda)?,
            AlgorithmConfig::alt(eta)?,
        ),
        TheoremId::SimScsc => (check_sim_scsc(g, eta)?, AlgorithmConfig::sim(eta)?),
        TheoremId::AltScsc => (check_alt_scsc(g, eta)?, AlgorithmConfig::alt(eta)?),
        TheoremId::SimNoSc => (check_sim_nosc(g, eta)?, AlgorithmConfig::sim(eta)?),
        TheoremId::AltNoSc => (check_alt_nosc(g, eta)?, AlgorithmConfig::alt(eta)?),
    };
    let values = bounds.entries.iter().map(|e| e.eigenvalue).collect();
    let mut report = report_from_spectrum(Spectrum::new(values, g.dim()), config);
    report.bounds = Some(bounds);
    Ok(report)
}

/// 200 log-spaced step sizes on `[1e-4, 1]`.
pub fn default_eta_grid() -> Vec<f64> {
    log_space(1e-4, 1.0, 200)
}

/// 50 evenly spaced momentum values on `[−0.98, 0]`.
pub fn default_beta_grid() -> Vec<f64> {
    lin_space(-0.98, 0.0, 50)
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)
                }
            })
            .collect(),
    }
}

pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Spectral radius of the operator for `config`, computed from the
/// Jacobian spectrum. Sim-GDA, EG, OGDA-Sim and NM operators are
/// polynomials (or companion forms) in `J`, so their eigenvalues are the
/// images of `Sp(J)`. Returns `None` for the alternating methods.
pub fn radius_from_jacobian_spectrum(jac: &Spectrum, config: AlgorithmConfig) -> Option<f64> {
    let eta = config.eta;
    let one = Complex64::new(1.0, 0.0);
    let quad_max = |b: Complex64, c: Complex64| {
        // roots of x² − bx + c
        let disc = (b * b - 4.0 * c).sqrt();
        ((b + disc) * 0.5).norm().max(((b - disc) * 0.5).norm())
    };
    let per_eig: Box<dyn Fn(Complex64) -> f64> = match config.algorithm {
        Algorithm::SimGda => Box::new(move |l| (one - eta * l).norm()),
        Algorithm::Eg => Box::new(move |l| (one - eta * l + eta * eta * l * l).norm()),
        Algorithm::OgdaSim => Box::new(move |l| quad_max(one - 2.0 * eta * l, -eta * l)),
        Algorithm::Nm => {
            let beta = config.beta.unwrap_or(0.0);
            Box::new(move |l| quad_max(one * (1.0 + beta) - eta * l, one * beta))
        }
        Algorithm::AltGda | Algorithm::OgdaAlt => return None,
    };
    Some(jac.values().iter().map(|&l| per_eig(l)).fold(0.0, f64::max))
}

fn grid_order(a: &(AlgorithmConfig, f64), b: &(AlgorithmConfig, f64)) -> Ordering {
    a.1.total_cmp(&b.1)
        .then(a.0.eta.total_cmp(&b.0.eta))
        .then(b.0.beta.unwrap_or(0.0).total_cmp(&a.0.beta.unwrap_or(0.0)))
}

/// Grid search for the configuration minimising the spectral radius.
/// Ties go to the smaller step size, then the larger momentum. Grid points
/// are evaluated in parallel and reduced in a fixed order, so the result
/// does not depend on grid order or thread scheduling.
pub fn tune(
    g: &QuadraticGame,
    algorithm: Algorithm,
    eta_grid: &[f64],
    beta_grid: Option<&[f64]>,
) -> Result<(AlgorithmConfig, SpectralReport)> {
    if eta_grid.is_empty() {
        return Err(Error::Tuning("empty step-size grid".into()));
    }
    if let Some(&bad) = eta_grid.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(Error::Tuning(format!(
            "step sizes must be positive, got {bad}"
        )));
    }
    let betas: Vec<Option<f64>> = if algorithm.uses_momentum() {
        let grid = beta_grid.ok_or_else(|| Error::Tuning("nm needs a momentum grid".into()))?;
        if grid.is_empty() {
            return Err(Error::Tuning("empty momentum grid".into()));
        }
        if let Some(&bad) = grid.iter().find(|b| !(**b > -1.0 && **b <= 0.0)) {
            return Err(Error::Tuning(format!(
                "momentum values must lie in (-1, 0], got {bad}"
            )));
        }
        grid.iter().map(|&b| Some(b)).collect()
    } else {
        vec![None]
    };

    let jac_spectrum = match algorithm {
        Algorithm::AltGda | Algorithm::OgdaAlt => None,
        _ => Some(linalg::eigenvalues(&g.jacobian())?),
    };

    let configs: Vec<AlgorithmConfig> = eta_grid
        .iter()
        .flat_map(|&eta| betas.iter().map(move |&beta| (eta, beta)))
        .map(|(eta, beta)| AlgorithmConfig::new(algorithm, eta, beta))
        .collect::<Result<_>>()?;

    let evaluated: Vec<(AlgorithmConfig, f64)> = configs
        .par_iter()
        .filter_map(|&cfg| {
            let rho = match &jac_spectrum {
                Some(js) => radius_from_jacobian_spectrum(js, cfg),
                None => analyze(g, cfg).ok().map(|r| r.rho),
            };
            rho.filter(|r| r.is_finite()).map(|r| (cfg, r))
        })
        .collect();

    let best = evaluated
        .iter()
        .min_by(|a, b| grid_order(a, b))
        .ok_or_else(|| Error::Tuning(format!("every grid point failed for {algorithm}")))?;
    let report = analyze(g, best.0)?;
    Ok((best.0, report))
}
