//! Schrödinger bridges for finite-state Markov chains.

mod entropy;
mod multi_step;
mod one_step;
mod types;
mod verify;

pub use entropy::{prior_joint, relative_entropy};
pub use multi_step::{propagate_harmonics, solve_bridge, BridgeSolution, Harmonics};
pub use one_step::{
    one_step_joint, one_step_transition, sinkhorn_doubly_stochastic, solve_one_step,
    SchrodingerPotentials,
};
pub use types::{MarkovPrior, ProbabilityVector, StochasticMatrix, SUM_TOL};
pub use verify::{bridge_residuals, max_rel_diff, one_step_residuals};

/// Solver settings for the classical iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalOptions {
    /// Stop when successive `φ̂₀` iterates are closer than this in the Hilbert metric.
    pub tol: f64,
    /// Iteration budget; `None` derives it from the Birkhoff rate of the kernel.
    pub max_iter: Option<usize>,
    /// Run the iteration on kernels with zero entries (no convergence guarantee).
    pub allow_zero_kernel: bool,
}

impl Default for ClassicalOptions {
    fn default() -> Self {
        ClassicalOptions {
            tol: 1e-12,
            max_iter: None,
            allow_zero_kernel: false,
        }
    }
}
