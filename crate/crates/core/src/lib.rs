pub mod dynamics;
pub mod error;
pub mod games;
pub mod linalg;
pub mod operators;
pub mod spectral;

pub use error::{Error, Result};
pub use games::{GameClassBounds, GameRegime, Provenance, QuadraticGame};
pub use linalg::{Matrix, Spectrum};
pub use operators::{Algorithm, AlgorithmConfig, Layout, UpdateOperator};
