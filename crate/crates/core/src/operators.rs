//! Per-iteration linear update operators for the gradient descent-ascent
//! family on quadratic games.
//!
//! Plain operators act on `z = (x, y)`. Two-step methods (optimistic and
//! momentum variants) act on the stacked state `(z_t, z_{t−1})`; the first
//! step duplicates `z_0` into the `z_{−1}` slot.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::games::{Provenance, QuadraticGame};
use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    SimGda,
    AltGda,
    /// Extragradient: `z ← z − ηV(z − ηV(z))`.
    Eg,
    OgdaSim,
    OgdaAlt,
    /// Simultaneous GDA with heavy-ball momentum `β ≤ 0`.
    Nm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::SimGda,
        Algorithm::AltGda,
        Algorithm::Eg,
        Algorithm::OgdaSim,
        Algorithm::OgdaAlt,
        Algorithm::Nm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::SimGda => "sim_gda",
            Algorithm::AltGda => "alt_gda",
            Algorithm::Eg => "eg",
            Algorithm::OgdaSim => "ogda_sim",
            Algorithm::OgdaAlt => "ogda_alt",
            Algorithm::Nm => "nm",
        }
    }

    /// Whether the operator acts on the stacked `(z_t, z_{t−1})` state.
    pub fn is_augmented(self) -> bool {
        matches!(
            self,
            Algorithm::OgdaSim | Algorithm::OgdaAlt | Algorithm::Nm
        )
    }

    pub fn uses_momentum(self) -> bool {
        self == Algorithm::Nm
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        match norm.as_str() {
            "sim_gda" | "simgda" | "sim" => Ok(Algorithm::SimGda),
            "alt_gda" | "altgda" | "alt" => Ok(Algorithm::AltGda),
            "eg" => Ok(Algorithm::Eg),
            "ogda_sim" | "ogdasim" | "ogda" => Ok(Algorithm::OgdaSim),
            "ogda_alt" | "ogdaalt" => Ok(Algorithm::OgdaAlt),
            "nm" => Ok(Algorithm::Nm),
            _ => Err(Error::Parameter(format!(
                "unknown algorithm {s:?} (expected one of sim_gda, alt_gda, eg, ogda_sim, ogda_alt, nm)"
            ))),
        }
    }
}

/// Algorithm plus hyperparameters. `beta` is present exactly for NM.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgorithmConfig {
    pub algorithm: Algorithm,
    pub eta: f64,
    pub beta: Option<f64>,
}

impl AlgorithmConfig {
    pub fn new(algorithm: Algorithm, eta: f64, beta: Option<f64>) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::Parameter(format!(
                "step size must be finite and positive, got {eta}"
            )));
        }
        match (algorithm.uses_momentum(), beta) {
            (true, None) => return Err(Error::Parameter("nm requires a momentum value".into())),
            (false, Some(_)) => {
                return Err(Error::Parameter(format!(
                    "{algorithm} takes no momentum value"
                )))
            }
            (true, Some(b)) if !(b > -1.0 && b <= 0.0) => {
                return Err(Error::Parameter(format!(
                    "momentum must lie in (-1, 0], got {b}"
                )))
            }
            _ => {}
        }
        Ok(Self {
            algorithm,
            eta,
            beta,
        })
    }

    pub fn sim(eta: f64) -> Result<Self> {
        Self::new(Algorithm::SimGda, eta, None)
    }

    pub fn alt(eta: f64) -> Result<Self> {
        Self::new(Algorithm::AltGda, eta, None)
    }

    pub fn nm(eta: f64, beta: f64) -> Result<Self> {
        Self::new(Algorithm::Nm, eta, Some(beta))
    }
}

impl fmt::Display for AlgorithmConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} eta={}", self.algorithm, self.eta)?;
        if let Some(b) = self.beta {
            write!(f, " beta={b}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    /// State `z = (x, y)` of the given dimension.
    Plain(usize),
    /// State `(z_t, z_{t−1})`; the value is the full stacked dimension.
    Augmented(usize),
}

impl Layout {
    pub fn state_dim(self) -> usize {
        match self {
            Layout::Plain(n) | Layout::Augmented(n) => n,
        }
    }

    /// Dimension of `z_t` inside the state.
    pub fn z_dim(self) -> usize {
        match self {
            Layout::Plain(n) => n,
            Layout::Augmented(n) => n / 2,
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Layout::Plain(n) => write!(f, "plain({n})"),
            Layout::Augmented(n) => write!(f, "augmented({n})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpdateOperator {
    pub matrix: Matrix,
    pub layout: Layout,
    pub config: AlgorithmConfig,
    pub game_ref: Provenance,
}

impl UpdateOperator {
    /// Builds the operator for `config` on `g`.
    pub fn build(g: &QuadraticGame, config: AlgorithmConfig) -> Result<Self> {
        let n = g.dim();
        let (matrix, layout) = match config.algorithm {
            Algorithm::SimGda => (sim_matrix(g, config.eta), Layout::Plain(n)),
            Algorithm::AltGda => (alt_matrix(g, config.eta), Layout::Plain(n)),
            Algorithm::Eg => (eg_matrix(g, config.eta), Layout::Plain(n)),
            Algorithm::OgdaSim => (ogda_sim_matrix(g, config.eta), Layout::Augmented(2 * n)),
            Algorithm::OgdaAlt => (ogda_alt_matrix(g, config.eta), Layout::Augmented(2 * n)),
            Algorithm::Nm => {
                let beta = config.beta.expect("validated config");
                (nm_matrix(g, config.eta, beta), Layout::Augmented(2 * n))
            }
        };
        Ok(Self {
            matrix,
            layout,
            config,
            game_ref: g.provenance().clone(),
        })
    }

    pub fn apply(&self, state: &[f64]) -> Result<Vec<f64>> {
        if state.len() != self.layout.state_dim() {
            return Err(Error::Dimension(format!(
                "state of length {} for a {} operator",
                state.len(),
                self.layout
            )));
        }
        Ok(self.matrix.matvec(state))
    }

    /// Stacks `z0` into this operator's layout (`(z0, z0)` when augmented).
    pub fn initial_state(&self, z0: &[f64]) -> Result<Vec<f64>> {
        if z0.len() != self.layout.z_dim() {
            return Err(Error::Dimension(format!(
                "initial point of length {} for a {} operator",
                z0.len(),
                self.layout
            )));
        }
        Ok(match self.layout {
            Layout::Plain(_) => z0.to_vec(),
            Layout::Augmented(_) => augment(z0),
        })
    }

    /// Matrix text with a leading comment naming the algorithm,
    /// hyperparameters and layout.
    pub fn to_text(&self) -> String {
        let beta = self
            .config
            .beta
            .map_or("none".to_string(), |b| format!("{b:.16e}"));
        format!(
            "# algorithm={} eta={:.16e} beta={} layout={} game={}\n{}",
            self.config.algorithm,
            self.config.eta,
            beta,
            self.layout,
            self.game_ref,
            self.matrix.to_text()
        )
    }
}

/// `(z0, z0)`.
pub fn augment(z0: &[f64]) -> Vec<f64> {
    let mut s = Vec::with_capacity(2 * z0.len());
    s.extend_from_slice(z0);
    s.extend_from_slice(z0);
    s
}

pub fn sim_operator(g: &QuadraticGame, eta: f64) -> Result<UpdateOperator> {
    UpdateOperator::build(g, AlgorithmConfig::new(Algorithm::SimGda, eta, None)?)
}

pub fn alt_operator(g: &QuadraticGame, eta: f64) -> Result<UpdateOperator> {
    UpdateOperator::build(g, AlgorithmConfig::new(Algorithm::AltGda, eta, None)?)
}

/// Alt-GDA with the factor order swapped: `y` first, then `x`. Same
/// spectrum as [`alt_operator`].
pub fn alt_operator_reversed(g: &QuadraticGame, eta: f64) -> Result<UpdateOperator> {
    let config = AlgorithmConfig::new(Algorithm::AltGda, eta, None)?;
    Ok(UpdateOperator {
        matrix: alt_reversed_matrix(g, eta),
        layout: Layout::Plain(g.dim()),
        config,
        game_ref: g.provenance().clone(),
    })
}

pub fn eg_operator(g: &QuadraticGame, eta: f64) -> Result<UpdateOperator> {
    UpdateOperator::build(g, AlgorithmConfig::new(Algorithm::Eg, eta, None)?)
}

pub fn ogda_sim_operator(g: &QuadraticGame, eta: f64) -> Result<UpdateOperator> {
    UpdateOperator::build(g, AlgorithmConfig::new(Algorithm::OgdaSim, eta, None)?)
}

pub fn ogda_alt_operator(g: &QuadraticGame, eta: f64) -> Result<UpdateOperator> {
    UpdateOperator::build(g, AlgorithmConfig::new(Algorithm::OgdaAlt, eta, None)?)
}

pub fn nm_operator(g: &QuadraticGame, eta: f64, beta: f64) -> Result<UpdateOperator> {
    UpdateOperator::build(g, AlgorithmConfig::nm(eta, beta)?)
}

/// One Alt-GDA iteration as two sequential half updates:
/// `x' = x − η∇ₓf(x, y)`, then `y' = y + η∇ᵧf(x', y)`.
pub fn half_step_alt(
    g: &QuadraticGame,
    eta: f64,
    x: &[f64],
    y: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.len() != g.d() || y.len() != g.p() {
        return Err(Error::Dimension(format!(
            "state ({}, {}) for a game with d={}, p={}",
            x.len(),
            y.len(),
            g.d(),
            g.p()
        )));
    }
    let (vx, _) = g.vector_field(x, y);
    let x_new: Vec<f64> = x.iter().zip(&vx).map(|(a, v)| a - eta * v).collect();
    let (_, vy) = g.vector_field(&x_new, y);
    let y_new = y.iter().zip(&vy).map(|(a, v)| a - eta * v).collect();
    Ok((x_new, y_new))
}

/// The two factors whose product is the Alt-GDA operator:
/// `[[I, 0], [ηBᵀ, I − ηC]] · [[I − ηA, −ηB], [0, I]]` (y-update, x-update).
pub fn alt_operator_factors(g: &QuadraticGame, eta: f64) -> (Matrix, Matrix) {
    let (d, p) = (g.d(), g.p());
    let id_d = Matrix::identity(d);
    let id_p = Matrix::identity(p);
    let y_step = Matrix::from_blocks(&[
        vec![&id_d, &Matrix::zeros(d, p)],
        vec![&g.b().transpose().scale(eta), &id_p.sub(&g.c().scale(eta))],
    ])
    .expect("conforming blocks");
    let x_step = Matrix::from_blocks(&[
        vec![&id_d.sub(&g.a().scale(eta)), &g.b().scale(-eta)],
        vec![&Matrix::zeros(p, d), &id_p],
    ])
    .expect("conforming blocks");
    (y_step, x_step)
}

pub(crate) fn sim_matrix(g: &QuadraticGame, eta: f64) -> Matrix {
    Matrix::identity(g.dim()).sub(&g.jacobian().scale(eta))
}

pub(crate) fn alt_matrix(g: &QuadraticGame, eta: f64) -> Matrix {
    let (d, p) = (g.d(), g.p());
    let bt = g.b().transpose();
    let top_left = Matrix::identity(d).sub(&g.a().scale(eta));
    let top_right = g.b().scale(-eta);
    let bottom_left = bt.matmul(&top_left).scale(eta);
    let bottom_right = Matrix::identity(p)
        .sub(&g.c().scale(eta))
        .sub(&bt.matmul(g.b()).scale(eta * eta));
    Matrix::from_blocks(&[
        vec![&top_left, &top_right],
        vec![&bottom_left, &bottom_right],
    ])
    .expect("conforming blocks")
}

pub(crate) fn alt_reversed_matrix(g: &QuadraticGame, eta: f64) -> Matrix {
    let (d, p) = (g.d(), g.p());
    let b = g.b();
    let bt = b.transpose();
    let i_minus_ec = Matrix::identity(p).sub(&g.c().scale(eta));
    let top_left = Matrix::identity(d)
        .sub(&g.a().scale(eta))
        .sub(&b.matmul(&bt).scale(eta * eta));
    let top_right = b.matmul(&i_minus_ec).scale(-eta);
    let bottom_left = bt.scale(eta);
    Matrix::from_blocks(&[vec![&top_left, &top_right], vec![&bottom_left, &i_minus_ec]])
        .expect("conforming blocks")
}

pub(crate) fn eg_matrix(g: &QuadraticGame, eta: f64) -> Matrix {
    let j = g.jacobian();
    Matrix::identity(g.dim())
        .sub(&j.scale(eta))
        .add(&j.matmul(&j).scale(eta * eta))
}

pub(crate) fn ogda_sim_matrix(g: &QuadraticGame, eta: f64) -> Matrix {
    let n = g.dim();
    let j = g.jacobian();
    let id = Matrix::identity(n);
    Matrix::from_blocks(&[
        vec![&id.sub(&j.scale(2.0 * eta)), &j.scale(eta)],
        vec![&id, &Matrix::zeros(n, n)],
    ])
    .expect("conforming blocks")
}

pub(crate) fn nm_matrix(g: &QuadraticGame, eta: f64, beta: f64) -> Matrix {
    let n = g.dim();
    let j = g.jacobian();
    let id = Matrix::identity(n);
    Matrix::from_blocks(&[
        vec![&id.scale(1.0 + beta).sub(&j.scale(eta)), &id.scale(-beta)],
        vec![&id, &Matrix::zeros(n, n)],
    ])
    .expect("conforming blocks")
}

/// One row-block of a sequential update: `new = base·s + Σ weight·(earlier new block)`.
struct SequentialRow {
    base: Matrix,
    fresh: Vec<(usize, Matrix)>,
}

/// Resolves a Gauss-Seidel style sweep into explicit rows over the old
/// state by substituting earlier rows into later ones.
fn compose_sequential(rows: Vec<SequentialRow>) -> Vec<Matrix> {
    let mut resolved: Vec<Matrix> = Vec::with_capacity(rows.len());
    for row in rows {
        let mut m = row.base;
        for (dep, weight) in &row.fresh {
            assert!(*dep < resolved.len(), "a row may only read earlier rows");
            m = m.add(&weight.matmul(&resolved[*dep]));
        }
        resolved.push(m);
    }
    resolved
}

// State s = (x_t, y_t, x_{t-1}, y_{t-1}).
//   x_{t+1} = x_t − 2η(Ax_t + By_t) + η(Ax_{t-1} + By_{t-1})
//   y_{t+1} = y_t + 2η(Bᵀx_{t+1} − Cy_t) − η(Bᵀx_t − Cy_{t-1})
pub(crate) fn ogda_alt_matrix(g: &QuadraticGame, eta: f64) -> Matrix {
    let (d, p) = (g.d(), g.p());
    let n = d + p;
    let a = g.a();
    let b = g.b();
    let c = g.c();
    let bt = b.transpose();

    let x_row = Matrix::from_blocks(&[vec![
        &Matrix::identity(d).sub(&a.scale(2.0 * eta)),
        &b.scale(-2.0 * eta),
        &a.scale(eta),
        &b.scale(eta),
    ]])
    .expect("conforming blocks");
    let y_row = Matrix::from_blocks(&[vec![
        &bt.scale(-eta),
        &Matrix::identity(p).sub(&c.scale(2.0 * eta)),
        &Matrix::zeros(p, d),
        &c.scale(eta),
    ]])
    .expect("conforming blocks");

    let resolved = compose_sequential(vec![
        SequentialRow {
            base: x_row,
            fresh: vec![],
        },
        SequentialRow {
            base: y_row,
            fresh: vec![(0, bt.scale(2.0 * eta))],
        },
    ]);
    let shift = Matrix::from_blocks(&[vec![&Matrix::identity(n), &Matrix::zeros(n, n)]])
        .expect("conforming blocks");
    Matrix::from_blocks(&[vec![&resolved[0]], vec![&resolved[1]], vec![&shift]])
        .expect("conforming blocks")
}

/// Raw operator matrix for a configuration, without validating `eta`.
/// Lets tests probe the `eta = 0` limit.
pub fn operator_matrix_unchecked(
    g: &QuadraticGame,
    algorithm: Algorithm,
    eta: f64,
    beta: f64,
) -> Matrix {
    match algorithm {
        Algorithm::SimGda => sim_matrix(g, eta),
        Algorithm::AltGda => alt_matrix(g, eta),
        Algorithm::Eg => eg_matrix(g, eta),
        Algorithm::OgdaSim => ogda_sim_matrix(g, eta),
        Algorithm::OgdaAlt => ogda_alt_matrix(g, eta),
        Algorithm::Nm => nm_matrix(g, eta, beta),
    }
}
