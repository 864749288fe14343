use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

use super::iteration::{estimated_rate, fixed_point};
use super::{
    check_positivity_improving, transformed_map, uniform_residuals, KrausMap, PositivityCheck,
    QuantumBridgeResult, QuantumOptions, QuantumPotentials,
};

/// Runs the sampled positivity-improving check and refuses a failing map
/// unless overridden.
pub(crate) fn positivity_gate(e: &KrausMap, opts: &QuantumOptions) -> Result<PositivityCheck> {
    let mut rng = crate::random::seeded(opts.seed);
    let check = check_positivity_improving(e, opts.positivity_trials, &mut rng);
    match &check {
        PositivityCheck::Fail(_) if !opts.override_positivity_check => {
            return Err(Error::NotPositivityImproving(check.describe()));
        }
        PositivityCheck::Fail(_) => log::warn!("positivity check overridden: {}", check.describe()),
        PositivityCheck::Inconclusive { .. } => log::warn!("{}", check.describe()),
        PositivityCheck::PassedOnSamples { .. } => log::info!("{}", check.describe()),
    }
    Ok(check)
}

/// Scales a Kraus map to a doubly stochastic one by solving the uniform-marginal
/// Schrödinger system
///
/// ```text
/// φ̂₀ → φ̂_T = ℰ†(φ̂₀) → φ_T = φ̂_T⁻¹ → φ₀ = ℰ(φ_T) → φ̂₀ = φ₀⁻¹
/// ```
///
/// and returning `F_i = χ_T E_i χ₀⁻¹`, which satisfies `ℱ(I) = I` and `ℱ†(I) = I`.
pub fn solve_doubly_stochastic(e: &KrausMap, opts: &QuantumOptions) -> Result<QuantumBridgeResult> {
    let positivity = positivity_gate(e, opts)?;
    let rate = estimated_rate(e, opts);
    let n = e.dim();

    let step = |phihat0: &CMatrix| -> Result<CMatrix> {
        let phihat_t = e.apply_unchecked(phihat0);
        let phi_t = linalg::pd_inverse(&phihat_t)?;
        let phi0 = e.apply_adjoint_unchecked(&phi_t);
        linalg::pd_inverse(&phi0)
    };
    let (x, report) = fixed_point(n, step, opts, rate)?;

    let left_cone = |m: &CMatrix| Error::LeftCone {
        iteration: report.iterations,
        iterate: Box::new(m.clone()),
        report: Box::new(report.clone()),
    };
    let phi_t = linalg::pd_inverse(&e.apply_unchecked(&x)).map_err(|_| left_cone(&x))?;
    let phi0 = e.apply_adjoint_unchecked(&phi_t);
    let phihat0 = linalg::pd_inverse(&phi0).map_err(|_| left_cone(&phi0))?;
    let phihat_t = e.apply_unchecked(&phihat0);
    let potentials = QuantumPotentials {
        phi0,
        phi_t,
        phihat0,
        phihat_t,
    };
    let transformed = transformed_map(e, &potentials, opts.gauge)?;
    let residuals = uniform_residuals(e, &potentials, &transformed, opts.verify_tol);
    if !residuals.all_passed() {
        return Err(Error::VerificationFailed {
            table: residuals,
            report: Box::new(report),
        });
    }
    log::info!(
        "doubly stochastic scaling converged in {} iterations (residual {:e})",
        report.iterations,
        report.final_residual
    );
    Ok(QuantumBridgeResult {
        transformed,
        potentials,
        steps: Vec::new(),
        intermediate_densities: Vec::new(),
        harmonics: None,
        report,
        residuals,
        gauge: opts.gauge,
        positivity: Some(positivity),
    })
}
