use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// The eigen iteration hit its cap. `partial` holds the eigenvalues
    /// that had already deflated when the iteration stopped.
    #[error("eigenvalue iteration did not converge after {iterations} iterations ({} of {dim} eigenvalues found)", partial.len())]
    EigenNoConvergence {
        iterations: usize,
        dim: usize,
        partial: Vec<Complex64>,
    },

    #[error("ill-posed conditioning: minimum real part {min_re:e} of the Jacobian spectrum is not positive")]
    IllPosedConditioning { min_re: f64 },

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("regime mismatch: {check} requires a {required} game, got {actual}")]
    Regime {
        check: &'static str,
        required: &'static str,
        actual: String,
    },

    #[error("step size {eta} exceeds the validity ceiling eta_max = {eta_max} for {check}")]
    EtaAboveCeiling {
        check: &'static str,
        eta: f64,
        eta_max: f64,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("trajectory diverged to a non-finite state at iteration {iter}")]
    TrajectoryNonFinite { iter: usize, last_good: Vec<f64> },

    #[error("rate estimation: {0}")]
    RateEstimation(String),

    #[error("tuning failed: {0}")]
    Tuning(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
