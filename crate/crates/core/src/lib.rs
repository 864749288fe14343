//! Schrödinger bridges on finite state spaces and their quantum analogue,
//! computed as fixed points of maps that contract the Hilbert projective metric.
//!
//! - [`cone`]: Hilbert metric on positive vectors and positive definite
//!   matrices, projective diameters and Birkhoff contraction ratios.
//! - [`classical`]: the Schrödinger system for Markov priors, Sinkhorn scaling,
//!   multi-step bridges.
//! - [`quantum`]: Kraus maps, doubly stochastic scaling, general-marginal and
//!   multi-step quantum bridges.

pub mod classical;
pub mod cone;
mod error;
pub mod linalg;
pub mod quantum;
pub mod random;
mod report;
mod residual;

pub use error::{Error, Result};
pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
pub use report::SolveReport;
pub use residual::{Residual, ResidualTable};

pub use classical::{
    MarkovPrior, ProbabilityVector, SchrodingerPotentials, StochasticMatrix,
};
pub use cone::{HilbertDistance, PositiveDefiniteMatrix, PositiveVector};
pub use quantum::{DensityMatrix, KrausMap, QuantumBridgeResult, QuantumOptions, QuantumPotentials};
