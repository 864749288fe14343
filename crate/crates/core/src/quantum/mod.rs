//! Kraus maps and the quantum Schrödinger system.
//!
//! Conventions: [`KrausMap::apply`] is the state evolution `ℰ†(ρ) = Σ E_i ρ E_i†`
//! and [`KrausMap::apply_adjoint`] its unital dual `ℰ(X) = Σ E_i† X E_i`.

mod density;
pub mod examples;
mod general;
mod iteration;
mod kraus;
mod multi_step;
mod positivity;
mod uniform;
mod verify;

pub use density::DensityMatrix;
pub use general::{pure_state_bridge, solve_general_bridge};
pub use kraus::{KrausMap, DEFAULT_COMPOSITION_CAP, TP_TOL};
pub use multi_step::multistep_bridge;
pub use positivity::{check_positivity_improving, PositivityCheck, Witness, WitnessReason};
pub use uniform::solve_doubly_stochastic;
pub use verify::{
    general_residuals, multistep_residuals, pure_residuals, transformed_map, uniform_residuals,
    PURE_TOL, VERIFY_TOL,
};

use crate::cone::PositiveDefiniteMatrix;
use crate::error::Result;
use crate::linalg::{self, CMatrix};
use crate::report::SolveReport;
use crate::residual::ResidualTable;

/// Factorization `φ = χ† χ` used to build the transformed coefficients
/// `F_i = χ_T E_i χ₀⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gauge {
    /// `χ = φ^{1/2}`, the Hermitian square root.
    #[default]
    Hermitian,
    /// `χ = R`, the upper-triangular Cholesky factor. Uniform marginals only.
    Triangular,
}

impl Gauge {
    /// `χ` with `χ† χ = φ`.
    pub fn factor(self, phi: &CMatrix) -> Result<CMatrix> {
        match self {
            Gauge::Hermitian => linalg::pd_sqrt(phi),
            Gauge::Triangular => linalg::upper_cholesky(phi),
        }
    }
}

/// Rescaling applied to `φ̂₀` after every iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// No rescaling. Both composite maps fix every point of the solution ray,
    /// so the iteration settles on a definite scale.
    #[default]
    None,
    /// Divide by the trace.
    UnitTrace,
}

#[derive(Debug, Clone)]
pub struct QuantumOptions {
    /// Stop once the Hilbert distance between successive `φ̂₀` falls below this.
    pub tol: f64,
    pub max_iter: usize,
    pub gauge: Gauge,
    pub normalization: Normalization,
    /// Skip the refusal on a failed positivity-improving check.
    pub override_positivity_check: bool,
    pub positivity_trials: usize,
    /// Samples for the projective diameter estimate behind the contraction bound.
    pub diameter_samples: usize,
    /// Seed for the sampled positivity check and diameter estimate.
    pub seed: u64,
    pub composition_cap: usize,
    /// Starting `φ̂₀`; the identity when absent.
    pub initial: Option<CMatrix>,
    /// Tolerance applied to the verification residuals.
    pub verify_tol: f64,
}

impl Default for QuantumOptions {
    fn default() -> Self {
        QuantumOptions {
            tol: 1e-12,
            max_iter: 100_000,
            gauge: Gauge::Hermitian,
            normalization: Normalization::None,
            override_positivity_check: false,
            positivity_trials: 64,
            diameter_samples: 64,
            seed: 0,
            composition_cap: DEFAULT_COMPOSITION_CAP,
            initial: None,
            verify_tol: VERIFY_TOL,
        }
    }
}

/// Space-time harmonics at the two endpoints: `φ` solves the backward
/// equation `ℰ(φ_T) = φ₀`, `φ̂` the forward one `ℰ†(φ̂₀) = φ̂_T`.
///
/// For the pure-state bridge `phi_t` is a rank-one projector, so the fields
/// are plain matrices rather than [`PositiveDefiniteMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumPotentials {
    pub phi0: CMatrix,
    pub phi_t: CMatrix,
    pub phihat0: CMatrix,
    pub phihat_t: CMatrix,
}

/// Harmonics at every time step of a multi-step bridge.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumHarmonics {
    pub phi: Vec<CMatrix>,
    pub phihat: Vec<CMatrix>,
}

#[derive(Debug, Clone)]
pub struct QuantumBridgeResult {
    /// The bridge map over the whole horizon, coefficients `F_i = χ_T E_i χ₀⁻¹`.
    pub transformed: KrausMap,
    pub potentials: QuantumPotentials,
    /// Per-step bridge maps (multi-step only).
    pub steps: Vec<KrausMap>,
    /// `ρ_t = φ_t^{1/2} φ̂_t φ_t^{1/2}` for `t = 0 … T` (multi-step only).
    pub intermediate_densities: Vec<CMatrix>,
    pub harmonics: Option<QuantumHarmonics>,
    pub report: SolveReport,
    pub residuals: ResidualTable,
    pub gauge: Gauge,
    /// Outcome of the sampled positivity-improving check, when it was run.
    pub positivity: Option<PositivityCheck>,
}

/// Hermitian square root of a positive definite matrix.
pub fn hermitian_sqrt(a: &PositiveDefiniteMatrix) -> Result<PositiveDefiniteMatrix> {
    PositiveDefiniteMatrix::new(linalg::pd_sqrt(a.matrix())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    #[test]
    fn hermitian_sqrt_examples() {
        let i = PositiveDefiniteMatrix::identity(3);
        assert!(linalg::max_abs(&(hermitian_sqrt(&i).unwrap().into_inner() - linalg::identity(3))) < 1e-15);
        let d = PositiveDefiniteMatrix::new(linalg::diag_real(&[4.0, 9.0])).unwrap();
        let s = hermitian_sqrt(&d).unwrap().into_inner();
        assert!(linalg::max_abs(&(s - linalg::diag_real(&[2.0, 3.0]))) < 1e-14);
    }

    #[test]
    fn hermitian_sqrt_reconstructs_random_matrices() {
        let mut rng = random::seeded(3);
        for n in 2..6 {
            let a = random::density_matrix(n, &mut rng).into_inner();
            let s = hermitian_sqrt(&PositiveDefiniteMatrix::new(a.clone()).unwrap()).unwrap().into_inner();
            assert!(linalg::rel_diff(&(&s * &s), &a) < 1e-11);
        }
    }

    #[test]
    fn gauges_factor_the_potential() {
        let mut rng = random::seeded(5);
        let phi = random::density_matrix(3, &mut rng).into_inner();
        for g in [Gauge::Hermitian, Gauge::Triangular] {
            let chi = g.factor(&phi).unwrap();
            assert!(linalg::rel_diff(&(chi.adjoint() * &chi), &phi) < 1e-12);
        }
        let r = Gauge::Triangular.factor(&phi).unwrap();
        assert!(r[(1, 0)].norm() == 0.0 && r[(2, 0)].norm() == 0.0 && r[(2, 1)].norm() == 0.0);
    }
}
