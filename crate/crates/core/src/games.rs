//! Quadratic minimax games `min_x max_y ½xᵀAx + xᵀBy − ½yᵀCy`, their class
//! constants, and seeded instance generators.
//!
//! Games carry no linear terms, so the origin is always an equilibrium.
//!
//! All generators draw from `ChaCha8Rng::seed_from_u64(seed)`, a portable
//! counter-based stream, and sample Gaussians with `rand_distr::Normal`.
//! The same `(parameters, seed)` pair yields a bit-identical game on every
//! platform.

use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Symmetry tolerance for `A` and `C`.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Eigenvalues of `A` and `C` may dip this far below zero.
pub const PSD_TOL: f64 = 1e-10;
/// Class constants at or below this value are reported as exactly zero.
pub const ZERO_TOL: f64 = 1e-10;
/// Resampling cap for rank-constrained coupling matrices.
pub const MAX_RESAMPLE: usize = 100;

/// Where a game came from: generator name, its parameters and seed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub generator: String,
    pub params: Vec<(String, String)>,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn inline() -> Self {
        Self {
            generator: "inline".into(),
            params: Vec::new(),
            seed: None,
        }
    }

    pub fn new(generator: &str, params: &[(&str, String)], seed: Option<u64>) -> Self {
        Self {
            generator: generator.into(),
            params: params
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
            seed,
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.generator)?;
        for (i, (k, v)) in self.params.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        write!(f, ")")?;
        if let Some(seed) = self.seed {
            write!(f, " seed={seed}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticGame {
    a: Matrix,
    b: Matrix,
    c: Matrix,
    provenance: Provenance,
}

/// Class constants of a game. Ratios whose denominator vanishes are `None`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GameClassBounds {
    pub mu_x: f64,
    pub mu_y: f64,
    pub l_x: f64,
    pub l_y: f64,
    /// `sqrt(λmin(BBᵀ))`; zero whenever `B` has more rows than columns.
    pub mu_xy: f64,
    pub l_xy: f64,
    pub l: f64,
    pub mu: f64,
    pub kappa: Option<f64>,
    pub kappa_x: Option<f64>,
    pub kappa_y: Option<f64>,
    pub kappa_xy: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GameRegime {
    Bilinear,
    Scsc,
    StrongConcaveOnly,
    General,
}

impl fmt::Display for GameRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameRegime::Bilinear => "bilinear",
            GameRegime::Scsc => "strongly-convex strongly-concave",
            GameRegime::StrongConcaveOnly => "strongly-concave-only",
            GameRegime::General => "general convex-concave",
        })
    }
}

/// One Jacobian eigenvalue checked against `{|λ| ≤ √2·L, Re λ ≥ μ}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SetKEntry {
    pub eigenvalue: Complex64,
    /// `Re λ − μ`
    pub re_margin: f64,
    /// `√2·L − |λ|`
    pub modulus_margin: f64,
    pub violated: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SetKReport {
    pub mu: f64,
    pub l: f64,
    pub entries: Vec<SetKEntry>,
}

impl SetKReport {
    pub fn violations(&self) -> usize {
        self.entries.iter().filter(|e| e.violated).count()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }
}

const SET_K_TOL: f64 = 1e-8;

impl QuadraticGame {
    /// Validates shapes, symmetry of `a` and `c`, and positive
    /// semi-definiteness up to [`PSD_TOL`].
    pub fn new(a: Matrix, b: Matrix, c: Matrix) -> Result<Self> {
        let (d, p) = (b.rows(), b.cols());
        if d == 0 || p == 0 {
            return Err(Error::InvalidGame(
                "player dimensions must be at least 1".into(),
            ));
        }
        if (a.rows(), a.cols()) != (d, d) {
            return Err(Error::InvalidGame(format!(
                "A is {}x{}, expected {d}x{d}",
                a.rows(),
                a.cols()
            )));
        }
        if (c.rows(), c.cols()) != (p, p) {
            return Err(Error::InvalidGame(format!(
                "C is {}x{}, expected {p}x{p}",
                c.rows(),
                c.cols()
            )));
        }
        for (name, m) in [("A", &a), ("C", &c)] {
            if !m.is_symmetric(SYMMETRY_TOL) {
                return Err(Error::InvalidGame(format!("{name} is not symmetric")));
            }
            let lo = linalg::symmetric_eigenvalues(m)?[0];
            if lo < -PSD_TOL {
                return Err(Error::InvalidGame(format!(
                    "{name} is not positive semi-definite (min eigenvalue {lo:e})"
                )));
            }
        }
        Ok(Self {
            a,
            b,
            c,
            provenance: Provenance::inline(),
        })
    }

    /// `f(x, y) = ½·a·x² + b·x·y − ½·c·y²`.
    pub fn scalar(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(Matrix::scalar(a), Matrix::scalar(b), Matrix::scalar(c))
    }

    pub fn bilinear(b: Matrix) -> Result<Self> {
        let (d, p) = (b.rows(), b.cols());
        Self::new(Matrix::zeros(d, d), b, Matrix::zeros(p, p))
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn c(&self) -> &Matrix {
        &self.c
    }

    /// Primal dimension.
    pub fn d(&self) -> usize {
        self.b.rows()
    }

    /// Dual dimension.
    pub fn p(&self) -> usize {
        self.b.cols()
    }

    /// `d + p`.
    pub fn dim(&self) -> usize {
        self.d() + self.p()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// `J = [[A, B], [−Bᵀ, C]]`.
    pub fn jacobian(&self) -> Matrix {
        let neg_bt = self.b.transpose().scale(-1.0);
        Matrix::from_blocks(&[vec![&self.a, &self.b], vec![&neg_bt, &self.c]])
            .expect("validated game blocks")
    }

    /// Gradient field `V(x, y) = (Ax + By, Cy − Bᵀx)`.
    pub fn vector_field(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let ax = self.a.matvec(x);
        let by = self.b.matvec(y);
        let cy = self.c.matvec(y);
        let btx = self.b.transpose().matvec(x);
        (
            ax.iter().zip(&by).map(|(u, v)| u + v).collect(),
            cy.iter().zip(&btx).map(|(u, v)| u - v).collect(),
        )
    }

    pub fn class_bounds(&self) -> GameClassBounds {
        let snap = |v: f64| if v <= ZERO_TOL { 0.0 } else { v };
        let ea = linalg::symmetric_eigenvalues(&self.a).expect("square");
        let ec = linalg::symmetric_eigenvalues(&self.c).expect("square");
        let sv = linalg::singular_values(&self.b);

        let mu_x = snap(ea[0]);
        let l_x = snap(*ea.last().unwrap());
        let mu_y = snap(ec[0]);
        let l_y = snap(*ec.last().unwrap());
        let l_xy = snap(sv[0]);
        let mu_xy = if self.d() <= self.p() {
            snap(sv[self.d() - 1])
        } else {
            0.0
        };

        let l = l_x.max(l_y).max(l_xy);
        let mu = mu_x.min(mu_y);
        let ratio = |den: f64| (den > 0.0).then(|| l / den);
        GameClassBounds {
            mu_x,
            mu_y,
            l_x,
            l_y,
            mu_xy,
            l_xy,
            l,
            mu,
            kappa: ratio(mu),
            kappa_x: ratio(mu_x),
            kappa_y: ratio(mu_y),
            kappa_xy: ratio(mu_xy),
        }
    }

    pub fn regime(&self) -> GameRegime {
        if self.a.is_zero() && self.c.is_zero() {
            return GameRegime::Bilinear;
        }
        let cb = self.class_bounds();
        if cb.mu_x > 0.0 && cb.mu_y > 0.0 {
            GameRegime::Scsc
        } else if cb.mu_x == 0.0 && cb.mu_y > 0.0 && cb.mu_xy > 0.0 {
            GameRegime::StrongConcaveOnly
        } else {
            GameRegime::General
        }
    }

    /// `max |λ| / min Re λ` over the Jacobian spectrum.
    pub fn condition_number_empirical(&self) -> Result<f64> {
        let sp = linalg::eigenvalues(&self.jacobian())?;
        let min_re = sp
            .values()
            .iter()
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min);
        if min_re <= 1e-12 {
            return Err(Error::IllPosedConditioning { min_re });
        }
        Ok(sp.radius() / min_re)
    }

    /// The origin. It is the unique equilibrium when `J` is nonsingular and
    /// a canonical representative of the equilibrium set otherwise.
    pub fn equilibrium(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![0.0; self.d()], vec![0.0; self.p()])
    }

    /// `‖x − x*‖² + ‖y − y*‖²`.
    pub fn distance_to_equilibrium(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != self.d() || y.len() != self.p() {
            return Err(Error::Dimension(format!(
                "state ({}, {}) for a game with d={}, p={}",
                x.len(),
                y.len(),
                self.d(),
                self.p()
            )));
        }
        let (xs, ys) = self.equilibrium();
        let sq =
            |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        Ok(sq(x, &xs) + sq(y, &ys))
    }

    /// Checks that every Jacobian eigenvalue lies in
    /// `{λ : |λ| ≤ √2·L, Re λ ≥ μ}`.
    pub fn check_set_k(&self) -> Result<SetKReport> {
        let cb = self.class_bounds();
        let regime = self.regime();
        if regime != GameRegime::Scsc {
            return Err(Error::Regime {
                check: "set-K containment",
                required: "strongly-convex strongly-concave",
                actual: regime.to_string(),
            });
        }
        let radius = 2f64.sqrt() * cb.l;
        let sp = linalg::eigenvalues(&self.jacobian())?;
        let entries = sp
            .values()
            .iter()
            .map(|&z| {
                let re_margin = z.re - cb.mu;
                let modulus_margin = radius - z.norm();
                SetKEntry {
                    eigenvalue: z,
                    re_margin,
                    modulus_margin,
                    violated: re_margin < -SET_K_TOL || modulus_margin < -SET_K_TOL,
                }
            })
            .collect();
        Ok(SetKReport {
            mu: cb.mu,
            l: cb.l,
            entries,
        })
    }

    /// Game file text: dimensions, provenance record, then the three
    /// matrices in the matrix text format.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# quadratic minimax game\n");
        s.push_str(&format!("dims {} {}\n", self.d(), self.p()));
        s.push_str(&format!("generator {}\n", self.provenance.generator));
        match self.provenance.seed {
            Some(seed) => s.push_str(&format!("seed {seed}\n")),
            None => s.push_str("seed none\n"),
        }
        for (k, v) in &self.provenance.params {
            s.push_str(&format!("param {k} {v}\n"));
        }
        for (name, m) in [("a", &self.a), ("b", &self.b), ("c", &self.c)] {
            s.push_str(&format!("matrix {name}\n"));
            s.push_str(&m.to_text());
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim_start().starts_with('#') && !l.trim().is_empty());
        let mut dims = None;
        let mut generator = None;
        let mut seed = None;
        let mut params = Vec::new();
        let (mut a, mut b, mut c) = (None, None, None);
        let perr = |line: usize, msg: String| Error::Parse {
            line: line + 1,
            msg,
        };

        while let Some((ln, line)) = lines.next() {
            let mut toks = line.split_whitespace();
            let key = toks.next().unwrap_or_default();
            let rest: Vec<&str> = toks.collect();
            match key {
                "dims" => {
                    let parsed: Vec<usize> = rest
                        .iter()
                        .map(|t| {
                            t.parse()
                                .map_err(|e| perr(ln, format!("bad dims {t:?}: {e}")))
                        })
                        .collect::<Result<_>>()?;
                    if parsed.len() != 2 {
                        return Err(perr(ln, "dims needs two values".into()));
                    }
                    dims = Some((parsed[0], parsed[1]));
                }
                "generator" => generator = Some(rest.join(" ")),
                "seed" => {
                    let t = rest.first().copied().unwrap_or("none");
                    seed = if t == "none" {
                        None
                    } else {
                        Some(
                            t.parse::<u64>()
                                .map_err(|e| perr(ln, format!("bad seed {t:?}: {e}")))?,
                        )
                    };
                }
                "param" => {
                    if rest.len() < 2 {
                        return Err(perr(ln, "param needs a key and a value".into()));
                    }
                    params.push((rest[0].to_string(), rest[1..].join(" ")));
                }
                "matrix" => {
                    let (m, _) = linalg::parse_matrix_lines(&mut lines)?;
                    match rest.first().copied() {
                        Some("a") => a = Some(m),
                        Some("b") => b = Some(m),
                        Some("c") => c = Some(m),
                        other => return Err(perr(ln, format!("unknown matrix block {other:?}"))),
                    }
                }
                other => return Err(perr(ln, format!("unknown field {other:?}"))),
            }
        }
        let missing = |what: &str| Error::Parse {
            line: 0,
            msg: format!("missing {what}"),
        };
        let game = Self::new(
            a.ok_or(missing("matrix a"))?,
            b.ok_or(missing("matrix b"))?,
            c.ok_or(missing("matrix c"))?,
        )?;
        if let Some((d, p)) = dims {
            if (d, p) != (game.d(), game.p()) {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!(
                        "dims {d} {p} disagree with matrices ({}, {})",
                        game.d(),
                        game.p()
                    ),
                });
            }
        }
        Ok(game.with_provenance(Provenance {
            generator: generator.unwrap_or_else(|| "inline".into()),
            params,
            seed,
        }))
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, std: f64) -> Matrix {
    if std == 0.0 {
        return Matrix::zeros(rows, cols);
    }
    let normal = Normal::new(0.0, std).expect("finite non-negative std");
    let data = (0..rows * cols).map(|_| normal.sample(rng)).collect();
    Matrix::new(rows, cols, data).expect("finite samples")
}

// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
// signs of R's diagonal folded into Q.
fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let g = gaussian_matrix(rng, n, n, 1.0).to_nalgebra();
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Matrix::from_nalgebra(&q)
}

fn symmetrize(m: &Matrix) -> Matrix {
    m.add(&m.transpose()).scale(0.5)
}

fn harmonic_diag(dim: usize) -> Matrix {
    Matrix::diag(&(1..=dim).map(|i| 1.0 / i as f64).collect::<Vec<_>>())
}

/// Strongly-convex strongly-concave instance: `A = C = diag(1, 1/2, …, 1/dim)`
/// and a square coupling `B` with i.i.d. `N(0, coupling_std²)` entries.
pub fn gen_scsc(dim: usize, seed: u64, coupling_std: f64) -> Result<QuadraticGame> {
    check_scsc_params(dim, coupling_std)?;
    let mut rng = rng(seed);
    let b = gaussian_matrix(&mut rng, dim, dim, coupling_std);
    let d = harmonic_diag(dim);
    Ok(
        QuadraticGame::new(d.clone(), b, d)?.with_provenance(Provenance::new(
            "scsc",
            &[
                ("dim", dim.to_string()),
                ("coupling_std", coupling_std.to_string()),
                ("basis", "diagonal-shared".into()),
            ],
            Some(seed),
        )),
    )
}

/// As [`gen_scsc`], but `A` and `C` are conjugated by independent random
/// orthogonal matrices.
pub fn gen_scsc_rotated(dim: usize, seed: u64, coupling_std: f64) -> Result<QuadraticGame> {
    check_scsc_params(dim, coupling_std)?;
    let mut rng = rng(seed);
    let b = gaussian_matrix(&mut rng, dim, dim, coupling_std);
    let d = harmonic_diag(dim);
    let qa = random_orthogonal(&mut rng, dim);
    let qc = random_orthogonal(&mut rng, dim);
    let a = symmetrize(&qa.matmul(&d).matmul(&qa.transpose()));
    let c = symmetrize(&qc.matmul(&d).matmul(&qc.transpose()));
    Ok(
        QuadraticGame::new(a, b, c)?.with_provenance(Provenance::new(
            "scsc",
            &[
                ("dim", dim.to_string()),
                ("coupling_std", coupling_std.to_string()),
                ("basis", "rotated-independent".into()),
            ],
            Some(seed),
        )),
    )
}

fn check_scsc_params(dim: usize, coupling_std: f64) -> Result<()> {
    if dim == 0 {
        return Err(Error::Parameter("dim must be at least 1".into()));
    }
    if !(coupling_std >= 0.0 && coupling_std.is_finite()) {
        return Err(Error::Parameter(format!(
            "coupling_std must be finite and >= 0, got {coupling_std}"
        )));
    }
    Ok(())
}

/// Condition-number scaling instance: `A = C = diag(1/n_i)` with `n_i`
/// evenly spaced on `[1, n_max]`, and a standard-normal `B` rescaled to
/// unit spectral norm.
pub fn gen_scaling_instance(dim: usize, n_max: f64, seed: u64) -> Result<QuadraticGame> {
    if dim < 2 {
        return Err(Error::Parameter("scaling instances need dim >= 2".into()));
    }
    if !(n_max >= 1.0 && n_max.is_finite()) {
        return Err(Error::Parameter(format!(
            "n_max must be finite and >= 1, got {n_max}"
        )));
    }
    let mut rng = rng(seed);
    let raw = gaussian_matrix(&mut rng, dim, dim, 1.0);
    let smax = linalg::singular_values(&raw)[0];
    let b = raw.scale(1.0 / smax);
    let eig: Vec<f64> = (0..dim)
        .map(|i| 1.0 / (1.0 + (n_max - 1.0) * i as f64 / (dim - 1) as f64))
        .collect();
    let d = Matrix::diag(&eig);
    Ok(
        QuadraticGame::new(d.clone(), b, d)?.with_provenance(Provenance::new(
            "scaling",
            &[("dim", dim.to_string()), ("n_max", n_max.to_string())],
            Some(seed),
        )),
    )
}

/// Bilinear game with a standard-normal `d x p` coupling.
pub fn gen_bilinear(d: usize, p: usize, seed: u64) -> Result<QuadraticGame> {
    if d == 0 || p == 0 {
        return Err(Error::Parameter("dimensions must be at least 1".into()));
    }
    let mut rng = rng(seed);
    let b = gaussian_matrix(&mut rng, d, p, 1.0);
    Ok(QuadraticGame::bilinear(b)?.with_provenance(Provenance::new(
        "bilinear",
        &[("d", d.to_string()), ("p", p.to_string())],
        Some(seed),
    )))
}

/// Game with a singular PSD `A`, positive-definite `C` and a coupling of
/// full row rank (`d <= p`). `A` is diagonal with a zero first entry and
/// the rest uniform on `[0, 1)`; `C` is diagonal uniform on `[0.1, 1)`;
/// `B` has `N(0, 1/p)` entries and is resampled until
/// `σ_d(B) > 1e-6·σ_1(B)`, at most [`MAX_RESAMPLE`] times.
pub fn gen_strong_concave_only(d: usize, p: usize, seed: u64) -> Result<QuadraticGame> {
    if d == 0 || p == 0 {
        return Err(Error::Parameter("dimensions must be at least 1".into()));
    }
    if d > p {
        return Err(Error::Parameter(format!(
            "a full-row-rank coupling needs d <= p, got d={d}, p={p}"
        )));
    }
    let mut rng = rng(seed);
    let unit = Uniform::new(0.0, 1.0).expect("valid range");
    let c_range = Uniform::new(0.1, 1.0).expect("valid range");
    let a_diag: Vec<f64> = (0..d)
        .map(|i| if i == 0 { 0.0 } else { unit.sample(&mut rng) })
        .collect();
    let c_diag: Vec<f64> = (0..p).map(|_| c_range.sample(&mut rng)).collect();
    let std = 1.0 / (p as f64).sqrt();
    for _ in 0..MAX_RESAMPLE {
        let b = gaussian_matrix(&mut rng, d, p, std);
        let sv = linalg::singular_values(&b);
        if sv[d - 1] > 1e-6 * sv[0] {
            return Ok(
                QuadraticGame::new(Matrix::diag(&a_diag), b, Matrix::diag(&c_diag))?
                    .with_provenance(Provenance::new(
                        "strong_concave_only",
                        &[("d", d.to_string()), ("p", p.to_string())],
                        Some(seed),
                    )),
            );
        }
    }
    Err(Error::Generation(format!(
        "no full-row-rank coupling after {MAX_RESAMPLE} attempts (d={d}, p={p}, seed={seed})"
    )))
}
